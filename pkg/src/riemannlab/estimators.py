"""scikit-learn style wrappers around the regularity estimators.

They make the experiments composable with sklearn tooling (get_params,
clone, pipelines); all numerical work happens in ``holder`` and
``turbulence``.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from . import holder, turbulence


class HolderExponentTransformer(BaseEstimator, TransformerMixin):
    """Map a column of times t to fitted local exponents alpha_fit(t).

    kind="R" uses R_{x0}; kind="Weierstrass" ignores x0 and N.
    """

    def __init__(self, x0=0, j_min=8, j_max=28, N=2 ** 19, kind="R", per_octave=4):
        self.x0 = x0
        self.j_min = j_min
        self.j_max = j_max
        self.N = N
        self.kind = kind
        self.per_octave = per_octave

    def fit(self, X, y=None):
        check_array(X, ensure_2d=True)
        self.n_features_in_ = 1
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        X = check_array(X, ensure_2d=True)
        if X.shape[1] != 1:
            raise ValueError("expected a single column of times")
        out = np.empty((X.shape[0], 2))
        for i, t in enumerate(X[:, 0]):
            if self.kind == "Weierstrass":
                est = holder.holder_exponent_weierstrass(
                    float(t), self.j_min, self.j_max, per_octave=self.per_octave)
            else:
                est = holder.holder_exponent_estimate(
                    self.x0, float(t), self.j_min, self.j_max, self.N,
                    per_octave=self.per_octave)
            out[i] = est.alpha_fit, est.residual
        # columns: alpha_fit, residual
        return out


class SpectrumEstimator(BaseEstimator):
    """Coarse-grained spectrum; ``predict`` returns d_hat at given alphas."""

    def __init__(self, x0=0, j=18, N=None, kind="R", oversample=16,
                 prefactor="scaling", fit_depth=8):
        self.x0 = x0
        self.j = j
        self.N = N
        self.kind = kind
        self.oversample = oversample
        self.prefactor = prefactor
        self.fit_depth = fit_depth

    def fit(self, X=None, y=None):
        self.spectrum_ = holder.spectrum_estimate(
            self.x0, 2 ** self.j, self.j, N=self.N, kind=self.kind,
            oversample=self.oversample, prefactor=self.prefactor,
            fit_depth=self.fit_depth)
        return self

    def predict(self, alpha):
        check_is_fitted(self, "spectrum_")
        alpha = np.atleast_1d(np.asarray(alpha, dtype=np.float64))
        return np.array([self.spectrum_.at(a) for a in alpha])


class StructureFunctionEstimator(BaseEstimator):
    """Structure-function exponents; ``predict`` maps p to zeta(p)."""

    def __init__(self, x0=0, j_min=10, j_max=18, grid=2 ** 22, N=None,
                 p_values=(0.5, 1, 1.5, 2, 2.5, 3, 3.5, 4, 4.5, 5, 5.5, 6)):
        self.x0 = x0
        self.j_min = j_min
        self.j_max = j_max
        self.grid = grid
        self.N = N
        self.p_values = p_values

    def fit(self, X=None, y=None):
        self.table_ = turbulence.structure_function_exponents(
            self.x0, list(self.p_values), range(self.j_min, self.j_max + 1),
            self.grid, self.N)
        return self

    def predict(self, p):
        check_is_fitted(self, "table_")
        p = np.atleast_1d(np.asarray(p, dtype=np.float64))
        return np.interp(p, self.table_.p, self.table_.zeta)
