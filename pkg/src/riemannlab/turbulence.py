"""Intermittency diagnostics: high-pass flatness, structure-function
exponents and the Legendre (Frisch-Parisi) consistency check.

In the time variable R_{x0} is a lacunary series: frequency n^2 carries
the coefficient c_n = 2 cos(2 pi n x0) / n^2, the modes n and -n having
merged.  Norms below are norms in t over one period.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import zeta

from . import exp_sums
from ._validation import (
    DegenerateFitError,
    NumericalError,
    ValidationError,
    check_int,
    check_real,
)


def highpass_l2(N_cut):
    """2 * sum_{n >= N_cut} 1/n^4, the squared l2 norm of the coefficients
    e(n x0)/n^2 over |n| >= N_cut (independent of x0)."""
    N_cut = check_int(N_cut, "N_cut", min_value=1)
    return float(2.0 * zeta(4.0, N_cut))


def _coefficients(x0, N_cut, M_max):
    n = np.arange(N_cut, M_max + 1, dtype=np.int64)
    return n, exp_sums._pair_weights(x0, n)


def _check_band(N_cut, M_max):
    N_cut = check_int(N_cut, "N_cut", min_value=1)
    M_max = check_int(M_max, "M_max", min_value=N_cut)
    if M_max > 2 ** 12:
        raise ValidationError("M_max above 2^12 is outside the desk-scale range")
    return N_cut, M_max


def highpass_l2_time(x0, N_cut, M_max):
    """||P f||_2^2 in t for the band N_cut <= |n| <= M_max."""
    N_cut, M_max = _check_band(N_cut, M_max)
    _, c = _coefficients(x0, N_cut, M_max)
    return math.fsum((c * c).tolist())


def min_quadrature_grid(N_cut, M_max):
    """Smallest power-of-two grid for which trapezoidal |f|^4 is exact.

    |f|^4 = |f^2|^2 carries frequencies up to 2 (M_max^2 - N_cut^2).
    """
    span = 2 * (M_max * M_max - N_cut * N_cut)
    return 1 << max(span, 1).bit_length()


def _l4_quadrature(x0, N_cut, M_max, grid):
    n, c = _coefficients(x0, N_cut, M_max)
    spectrum = np.bincount((n * n) % grid, weights=c, minlength=grid)
    f = np.fft.ifft(spectrum) * grid
    a2 = np.abs(f) ** 2
    return float(np.mean(a2 * a2)), float(np.mean(a2))


def _l4_convolution(x0, N_cut, M_max):
    n, c = _coefficients(x0, N_cut, M_max)
    n2 = n * n
    # f^2 has coefficient b_k = sum_{n1^2 + n2^2 = k} c_n1 c_n2
    k = (n2[:, None] + n2[None, :]).ravel()
    w = (c[:, None] * c[None, :]).ravel()
    b = np.bincount(k - k.min(), weights=w)
    return math.fsum((b * b).tolist()), math.fsum((c * c).tolist())


def l4_norm4(x0, N_cut, M_max, grid=None, method="quadrature"):
    """(||f||_4^4, ||f||_2^2) of the band-limited sum, by either method."""
    N_cut, M_max = _check_band(N_cut, M_max)
    if method == "convolution":
        return _l4_convolution(x0, N_cut, M_max)
    if method != "quadrature":
        raise ValidationError(f"unknown method {method!r}")
    need = min_quadrature_grid(N_cut, M_max)
    if grid is None:
        grid = need
    grid = check_int(grid, "grid", min_value=1)
    if grid <= 2 * (M_max * M_max - N_cut * N_cut):
        raise NumericalError(
            f"grid {grid} aliases |f|^4; need grid > {2 * (M_max ** 2 - N_cut ** 2)}")
    return _l4_quadrature(x0, N_cut, M_max, grid)


def flatness(x0, N_cut, M_max, grid=None, method="quadrature"):
    """||f||_4^4 / ||f||_2^4 for f = sum_{N_cut <= |n| <= M_max} e(n^2 t + n x0)/n^2.

    Both norms are taken in t.  ``grid`` defaults to the smallest exact
    quadrature grid.
    """
    l4, l2 = l4_norm4(x0, N_cut, M_max, grid, method)
    if l2 <= 0:
        raise NumericalError("band has zero energy (all coefficients vanish)")
    return l4 / (l2 * l2)


@dataclass(frozen=True)
class FlatnessCurve:
    """F(N) at N = 2^k with both methods; ``tail_bound`` bounds the relative
    L2 energy beyond M_max."""

    N: np.ndarray
    quadrature: np.ndarray
    convolution: np.ndarray
    M_max: np.ndarray
    tail_bound: np.ndarray
    x0: float = 0.0

    @property
    def growth_exponent(self):
        """Least-squares slope of F against log2 N."""
        return float(np.polyfit(np.log2(self.N), self.quadrature, 1)[0])


def flatness_curve(x0, ks, band=4):
    """F(2^k) for k in ``ks`` with M_max = band * 2^k."""
    ks = [check_int(k, "k", min_value=0, max_value=12) for k in ks]
    band = check_int(band, "band", min_value=1)
    Ns, Ms, fq, fc, tails = [], [], [], [], []
    for k in ks:
        N = 2 ** k
        M = band * N
        fq.append(flatness(x0, N, M, method="quadrature"))
        fc.append(flatness(x0, N, M, method="convolution"))
        tails.append(highpass_l2(M + 1) / highpass_l2(N))
        Ns.append(N)
        Ms.append(M)
    return FlatnessCurve(N=np.array(Ns), quadrature=np.array(fq),
                         convolution=np.array(fc), M_max=np.array(Ms),
                         tail_bound=np.array(tails), x0=float(x0))


# --------------------------------------------------- structure functions

@dataclass(frozen=True)
class StructureFunctionTable:
    """zeta(p) = slope of log S_p(h) against log h, S_p(h) = mean |R(t+h) - R(t)|^p."""

    p: np.ndarray
    zeta: np.ndarray
    js: np.ndarray
    S: np.ndarray
    residual: np.ndarray


def structure_function_exponents(x0, p_list, j_range, grid, N=None):
    """Structure-function exponents of R_{x0} on a uniform grid of ``grid``
    points (exact values for rational x0 and N=None).  Increments at
    h = 2^-j are circular shifts, so every grid point contributes."""
    p = np.asarray(p_list, dtype=np.float64)
    if p.ndim != 1 or p.size == 0 or np.any(p < 0) or np.any(p > 8):
        raise ValidationError("p_list must be values in [0, 8]")
    grid = check_int(grid, "grid", min_value=2 ** 16)
    if grid & (grid - 1):
        raise ValidationError("grid must be a power of two")
    js = np.array(sorted(set(int(j) for j in j_range)))
    if len(js) < 3:
        raise ValidationError("need at least 3 scales")
    if js[0] < 1 or 2 ** js[-1] > grid:
        raise ValidationError("scales 2^-j must be multiples of the grid step")
    v = exp_sums.eval_R_grid(x0, grid, N)
    absinc = [np.abs(np.roll(v, -(grid >> j)) - v) for j in js]
    S = np.array([[np.mean(a ** pp) for a in absinc] for pp in p])
    logh = -js * math.log(2.0)
    zeta_p = np.zeros(p.size)
    resid = np.zeros(p.size)
    for i, pp in enumerate(p):
        if pp == 0:
            continue
        y = np.log(S[i])
        if not np.all(np.isfinite(y)) or np.ptp(y) == 0:
            raise DegenerateFitError(f"structure function degenerate at p={pp}")
        sl, ic = np.polyfit(logh, y, 1)
        zeta_p[i] = sl
        resid[i] = np.sqrt(np.mean((y - sl * logh - ic) ** 2))
    return StructureFunctionTable(p=p, zeta=zeta_p, js=js, S=S, residual=resid)


def legendre(alpha, p, zeta_p):
    """D(alpha) = min_p (alpha p - zeta(p) + 1) and the minimizing index."""
    alpha = np.atleast_1d(np.asarray(alpha, dtype=np.float64))
    p = np.asarray(p, dtype=np.float64)
    zeta_p = np.asarray(zeta_p, dtype=np.float64)
    vals = alpha[:, None] * p[None, :] - zeta_p[None, :] + 1.0
    k = np.argmin(vals, axis=1)
    return vals[np.arange(alpha.size), k], k


def legendre_dual(p, alpha, d):
    """zeta(p) = min_alpha (alpha p - d(alpha) + 1), the inverse transform."""
    p = np.atleast_1d(np.asarray(p, dtype=np.float64))
    alpha = np.asarray(alpha, dtype=np.float64)
    d = np.asarray(d, dtype=np.float64)
    vals = p[:, None] * alpha[None, :] - d[None, :] + 1.0
    return vals.min(axis=1)


@dataclass(frozen=True)
class FrischParisiReport:
    alpha: np.ndarray
    d_legendre: np.ndarray
    d_measured: np.ndarray
    deviation_measured: float
    deviation_theory: float
    boundary: np.ndarray
    argmin_p: np.ndarray


def frisch_parisi_check(spectrum, sf, alpha_range=(0.55, 0.70)):
    """Compare min_p (alpha p - zeta(p) + 1) with the measured d_hat(alpha)
    and with 4 alpha - 2 on the bins inside ``alpha_range``.

    ``boundary`` flags bins whose minimum sits at the first or last p.
    """
    lo, hi = alpha_range
    sel = ((spectrum.alpha >= lo - 1e-9) & (spectrum.alpha <= hi + 1e-9)
           & np.isfinite(spectrum.d_hat))
    if sel.sum() < 2:
        raise NumericalError("fewer than two populated bins in the alpha range")
    p = np.asarray(sf.p, dtype=np.float64)
    order = np.argsort(p)
    p, z = p[order], np.asarray(sf.zeta)[order]
    a = spectrum.alpha[sel]
    dl, k = legendre(a, p, z)
    dm = spectrum.d_hat[sel]
    return FrischParisiReport(
        alpha=a, d_legendre=dl, d_measured=dm,
        deviation_measured=float(np.max(np.abs(dl - dm))),
        deviation_theory=float(np.max(np.abs(dl - (4 * a - 2)))),
        boundary=(k == 0) | (k == p.size - 1), argmin_p=p[k])
