"""Local regularity of R_{x0} and W: oscillation fits, scaling at rationals,
exponents predicted from Diophantine data, and coarse-grained spectra.

Exponents come from oscillations, the sup of |f(t +- h') - f(t)| over a
nested set of offsets h' <= h, rather than from single increments, which
dip below the Hölder envelope and bias regressions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from . import exp_sums
from .diophantine import continued_fraction, irrationality_exponent_estimate
from ._validation import (
    DegenerateFitError,
    ValidationError,
    as_rational,
    check_int,
    check_power_of_two,
    check_real,
)

ALPHA_CLIP = 1.6
RESIDUAL_FLAG = 0.5
DEFAULT_BIN_WIDTH = 0.05


def default_alpha_bins(width=DEFAULT_BIN_WIDTH):
    """Bin centres covering [0.45, 1.6]."""
    return np.round(np.arange(0.45, ALPHA_CLIP + 1e-9, width), 10)


@dataclass(frozen=True)
class HolderEstimate:
    """Fitted pointwise exponent with its oscillation table.

    ``h`` and ``osc`` are aligned; ``osc`` is nondecreasing in ``h``.
    ``flagged`` marks fits whose RMS residual (in log2 units) exceeds 0.5.
    """

    t: float
    alpha_fit: float
    residual: float
    j_range: tuple
    h: np.ndarray
    osc: np.ndarray
    flagged: bool = False


def _offsets(j_min, j_max, per_octave):
    k = np.arange(j_min * per_octave, j_max * per_octave + 1)
    return 2.0 ** (-k / per_octave)


def _two_sided_increments(f, f0, offsets):
    return np.array([max(abs(f(h) - f0), abs(f(-h) - f0)) for h in offsets])


def _riemann_probe(x0, t, N):
    series = exp_sums._RiemannSeries(check_real(x0, "x0"),
                                     check_int(N, "N", min_value=1,
                                               max_value=exp_sums.MAX_TERMS))
    t = check_real(t, "t")
    if not isinstance(t, Fraction):
        t = float(t) - math.floor(float(t))
    return (lambda h: series.value(t, h)), series.value(t)


def _weierstrass_probe(t, N):
    t = float(check_real(t, "t"))
    return (lambda h: exp_sums.eval_weierstrass(t + h, N)), exp_sums.eval_weierstrass(t, N)


def oscillation(x0, t, h, N, samples=8, *, per_octave=4):
    """sup over offsets h' in {h 2^(-k/per_octave)}, k < samples, of
    |R(t + h') - R(t)| and |R(t - h') - R(t)|.

    ``t`` may be a Fraction, in which case offsets are added without
    rounding t.
    """
    h = check_real(h, "h", min_value=0.0, max_value=0.5, strict_min=True)
    samples = check_int(samples, "samples", min_value=8)
    f, f0 = _riemann_probe(x0, t, N)
    offsets = float(h) * 2.0 ** (-np.arange(samples) / per_octave)
    return float(np.max(_two_sided_increments(f, f0, offsets)))


def _fit_oscillations(t, inc, offsets, j_min, j_max, per_octave):
    # osc(2^-j) is the max over every sampled offset <= 2^-j
    osc_all = np.maximum.accumulate(inc[::-1])[::-1]
    js = np.arange(j_min, j_max + 1)
    osc = osc_all[::per_octave][: len(js)]
    if np.any(osc <= 0) or np.ptp(np.log2(osc)) == 0:
        raise DegenerateFitError(f"oscillations at t={t} are degenerate")
    y = np.log2(osc)
    slope, intercept = np.polyfit(-js, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * -js + intercept)) ** 2)))
    alpha = float(np.clip(slope, 0.0, ALPHA_CLIP))
    return HolderEstimate(t=float(t), alpha_fit=alpha, residual=resid,
                          j_range=(j_min, j_max), h=2.0 ** -js.astype(float),
                          osc=osc, flagged=resid > RESIDUAL_FLAG)


def _check_scales(j_min, j_max, limit):
    j_min = check_int(j_min, "j_min", min_value=1)
    j_max = check_int(j_max, "j_max", max_value=limit)
    if not j_min < j_max:
        raise ValidationError("need j_min < j_max")
    return j_min, j_max


def holder_exponent_estimate(x0, t, j_min, j_max, N, *, per_octave=4):
    """Slope of log2 osc(2^-j) against -j for R_{x0} at t.

    Offsets are sampled ``per_octave`` times per octave between 2^-j_max and
    2^-j_min on both sides of t.  Scales below 2^-40 exceed the phase
    precision and are rejected.
    """
    j_min, j_max = _check_scales(j_min, j_max, 40)
    f, f0 = _riemann_probe(x0, t, N)
    offsets = _offsets(j_min, j_max, per_octave)
    inc = _two_sided_increments(f, f0, offsets)
    return _fit_oscillations(t, inc, offsets, j_min, j_max, per_octave)


def holder_exponent_weierstrass(t, j_min, j_max, N=None, *, per_octave=4):
    """Same regression for W(t) = sum cos(4^n t)/2^n.

    The default truncation keeps terms with 4^n up to 2^8 / h_min; deeper
    terms only amplify the rounding of t + h.
    """
    j_min, j_max = _check_scales(j_min, j_max, 40)
    if N is None:
        N = j_max // 2 + 8
    f, f0 = _weierstrass_probe(t, N)
    offsets = _offsets(j_min, j_max, per_octave)
    inc = _two_sided_increments(f, f0, offsets)
    return _fit_oscillations(t, inc, offsets, j_min, j_max, per_octave)


# ------------------------------------------------------ rational points

@dataclass(frozen=True)
class RationalScalingFit:
    """Fit log|R(p/q + h) - R(p/q)| = exponent log h + log prefactor.

    ``classification`` is "1/2" when q is a multiple of 4Q (then
    dist(x0, Z/q) = 0 and the Gauss sum G(p, m, q) is nonzero), otherwise
    "unclassified".
    """

    exponent: float
    prefactor: float
    residual: float
    h: np.ndarray
    increments: np.ndarray
    p: int
    q: int
    m: int
    dist: Fraction
    gauss_modulus: float
    in_4QN: bool
    classification: str


def rational_scaling_fit(x0, p, q, h_range=(12, 30), N=2 ** 20):
    """Increment scaling of R_{x0} at the rational p/q.

    ``h_range = (j_lo, j_hi)`` selects h = 2^-j for j_lo <= j <= j_hi; it
    must satisfy 2^-j_lo <= q^-3.  R(p/q) itself is the full series
    (evaluated exactly), since the truncation error of R_N at a rational is
    coherent while at p/q + h it is not.
    """
    x = as_rational(x0, "x0")
    if x is None:
        raise ValidationError("rational_scaling_fit needs x0 as int or Fraction")
    p = check_int(p, "p")
    q = check_int(q, "q", min_value=1)
    if math.gcd(p, q) != 1:
        raise ValidationError(f"need gcd(p, q) = 1, got {p}/{q}")
    j_lo, j_hi = (check_int(v, "h_range") for v in h_range)
    if j_hi - j_lo < 3:
        raise ValidationError("h_range must span at least 4 dyadic scales")
    if 2.0 ** -j_lo > float(q) ** -3:
        raise ValidationError(f"h_range must lie below q^-3 = {float(q) ** -3:.3g}")
    if j_hi > 40:
        raise ValidationError("h below 2^-40 exceeds the phase precision")
    t = Fraction(p, q)
    base = exp_sums.eval_R_rational_exact(x, t)
    series = exp_sums._RiemannSeries(x, N)
    js = np.arange(j_lo, j_hi + 1)
    h = 2.0 ** -js.astype(float)
    inc = np.array([abs(series.value(t, hh) - base) for hh in h])
    if np.any(inc <= 0):
        raise DegenerateFitError("zero increment in rational scaling fit")
    slope, intercept = np.polyfit(np.log(h), np.log(inc), 1)
    resid = float(np.sqrt(np.mean((np.log(inc) - slope * np.log(h) - intercept) ** 2)))

    Q = x.denominator
    m = round(x * q)
    dist = x - Fraction(m, q)
    gauss = exp_sums.gauss_sum(p, m, q).modulus
    in_4QN = q % (4 * Q) == 0
    return RationalScalingFit(
        exponent=float(slope), prefactor=float(math.exp(intercept)),
        residual=resid, h=h, increments=inc, p=p, q=q, m=m, dist=dist,
        gauss_modulus=gauss, in_4QN=in_4QN,
        classification="1/2" if in_4QN else "unclassified")


@dataclass(frozen=True)
class PredictedExponent:
    """1/2 + 1/(2 mu_hat) for irrational t, or the rational classification.

    ``value`` is None for rationals outside 4QN; ``lower_bound_only`` is set
    when no convergent denominator lies in 4QN, so the unconstrained mu_hat
    only yields the lower bound.
    """

    value: Optional[float]
    classification: str
    mu_hat: Optional[float] = None
    lower_bound_only: bool = False


def exponent_from_mu(mu):
    mu = check_real(mu, "mu", min_value=1.0)
    return 0.5 + 0.5 / float(mu)


def _classify_rational(r, Q):
    if r.denominator % (4 * Q) == 0:
        return PredictedExponent(value=0.5, classification="1/2 (q in 4QN)")
    return PredictedExponent(value=None,
                             classification="unclassified (candidate 3/2)")


def predicted_exponent(x0, t, depth=80):
    """Exponent of R_{x0} at t predicted from the continued fraction of t.

    For irrational t, mu_hat is the largest mu_n among convergents with
    q_n in 4QN inside the deepest third of the expansion; without such
    convergents the unconstrained estimate is used and flagged.
    """
    x = as_rational(x0, "x0")
    if x is None:
        raise ValidationError("predicted_exponent needs x0 as int or Fraction")
    Q = x.denominator
    r = as_rational(t, "t")
    if r is not None:
        return _classify_rational(r, Q)
    cf = continued_fraction(t, depth)
    if cf.is_rational:
        return _classify_rational(cf.exact_target, Q)
    est = irrationality_exponent_estimate(cf)
    usable = [(q, m) for (p, q), m in zip(cf.convergents, cf.exponents)
              if q >= 2 and math.isfinite(m)]
    lo, hi = est.window
    constrained = [m for q, m in usable[lo:hi] if q % (4 * Q) == 0]
    if constrained:
        mu = max(constrained)
        return PredictedExponent(value=exponent_from_mu(mu),
                                 classification="irrational (4QN convergents)",
                                 mu_hat=mu)
    return PredictedExponent(value=exponent_from_mu(est.value),
                             classification="irrational (lower bound)",
                             mu_hat=est.value, lower_bound_only=True)


# ------------------------------------------------------------ spectrum

@dataclass(frozen=True)
class SpectrumTable:
    """Coarse-grained spectrum d_hat(alpha) = log2 N_j(alpha) / j.

    Empty bins hold -inf.  ``prefactor`` is the constant C in the box
    exponent log(osc / C) / log 2^-j and ``typical_exponent`` the slope of
    the mean log-oscillation across the scales used to fit C.
    """

    alpha: np.ndarray
    width: float
    d_hat: np.ndarray
    counts: np.ndarray
    j: int
    prefactor: float
    typical_exponent: float
    kind: str = "R"
    exponents: Optional[np.ndarray] = field(default=None, repr=False)

    def at(self, alpha):
        """d_hat at the bin whose centre is closest to ``alpha``."""
        return float(self.d_hat[int(np.argmin(np.abs(self.alpha - alpha)))])

    def mass_fraction(self, lo, hi):
        """Fraction of boxes whose bin centre lies in [lo, hi]."""
        sel = (self.alpha >= lo - 1e-12) & (self.alpha <= hi + 1e-12)
        return float(self.counts[sel].sum() / max(self.counts.sum(), 1))


def _diameters(X):
    """Diameter of each row's point set (real or complex)."""
    if not np.iscomplexobj(X):
        return np.ptp(X, axis=1)
    D = np.zeros(X.shape[0])
    for a in range(X.shape[1]):
        np.maximum(D, np.abs(X - X[:, a:a + 1]).max(axis=1), out=D)
    return D


def _sweep(sampler, j, oversample, depth, chunk_samples=2 ** 20):
    """Box diameters at scale 2^-j and mean log2 diameters at j-depth..j.

    Samples are k/K of a period for k in [0, K], K = 2^j * oversample.  Each
    box at every level is represented by oversample + 1 equally spaced
    samples including its right endpoint, so all levels are sampled alike.
    """
    K = 2 ** j * oversample
    coarse = 2 ** (j - depth)
    span = K // coarse
    per_chunk = max(1, chunk_samples // span)
    sums = np.zeros(depth + 1)
    fine = []
    for c0 in range(0, coarse, per_chunk):
        c1 = min(coarse, c0 + per_chunk)
        idx = np.arange(c0 * span, c1 * span + 1, dtype=np.int64)
        v = sampler(idx)
        for lev in range(depth + 1):
            b = K >> (j - depth + lev)
            nb = (c1 - c0) * (span // b)
            pos = (np.arange(nb)[:, None] * b
                   + (np.arange(oversample + 1) * (b // oversample))[None, :])
            d = _diameters(v[pos])
            sums[lev] += np.log2(d).sum()
            if lev == depth:
                fine.append(d)
    js = np.arange(j - depth, j + 1)
    return np.concatenate(fine), sums / 2.0 ** js, js


def spectrum_estimate(x0, grid_size, j, alpha_bins=None, N=None, *,
                      kind="R", oversample=16, prefactor="scaling",
                      fit_depth=8, keep_exponents=False):
    """Coarse-grained spectrum of R_{x0} (or W with ``kind="Weierstrass"``).

    The period is cut into ``grid_size = 2^j`` boxes; each box exponent is
    alpha_i = log(osc_i / C) / log(2^-j) with osc_i the diameter of the box
    image, and d_hat(alpha) = log2 #{i : alpha_i in bin} / j.

    ``prefactor`` sets C: "scaling" (default) takes the intercept of the
    mean log2 oscillation fitted over scales j - fit_depth .. j; "analytic"
    uses |F(0)| = 2 sqrt(2) pi, the sqrt(h) amplitude of R at integers; a
    number is used as is.  For rational x0 (int or Fraction) and N=None the
    R values are exact.
    """
    grid_size = check_power_of_two(grid_size, "grid_size", min_value=2 ** 14)
    j = check_int(j, "j", min_value=14, max_value=24)
    if grid_size != 2 ** j:
        raise ValidationError("grid_size must equal 2^j (one box per grid cell)")
    oversample = check_power_of_two(oversample, "oversample", min_value=2)
    fit_depth = check_int(fit_depth, "fit_depth", min_value=2, max_value=j - 1)
    kind = exp_sums.SeriesKind(kind)
    alpha = np.asarray(default_alpha_bins() if alpha_bins is None else alpha_bins,
                       dtype=np.float64)
    if alpha.ndim != 1 or alpha.size < 1:
        raise ValidationError("alpha_bins must be a 1-d array of bin centres")
    width = float(np.min(np.diff(alpha))) if alpha.size > 1 else DEFAULT_BIN_WIDTH
    K = grid_size * oversample

    if kind is exp_sums.SeriesKind.WEIERSTRASS:
        terms = j + 4 if N is None else check_int(N, "N", min_value=1)
        def sampler(idx):
            return exp_sums.eval_weierstrass(2.0 * math.pi * (idx / K), terms)
    elif kind is exp_sums.SeriesKind.R:
        if N is None and as_rational(x0, "x0") is None:
            N = K
        values = exp_sums.eval_R_grid(x0, K, N)
        def sampler(idx):
            return values[idx % K]
    else:
        raise ValidationError("spectrum_estimate supports kinds R and Weierstrass")

    osc, level_means, js = _sweep(sampler, j, oversample, fit_depth)
    slope, intercept = np.polyfit(js, level_means, 1)
    if prefactor == "scaling":
        C = 2.0 ** intercept
    elif prefactor == "analytic":
        if kind is not exp_sums.SeriesKind.R:
            raise ValidationError("the analytic prefactor applies to R only")
        C = exp_sums.increment_prefactor()
    else:
        C = float(check_real(prefactor, "prefactor", min_value=0.0, strict_min=True))

    with np.errstate(divide="ignore"):
        a = np.log(osc / C) / np.log(2.0 ** -j)
    a = np.clip(np.nan_to_num(a, nan=ALPHA_CLIP, posinf=ALPHA_CLIP), 0.0, ALPHA_CLIP)
    edges_lo = alpha - width / 2
    k = np.searchsorted(edges_lo, a, side="right") - 1
    ok = (k >= 0) & (a < alpha[np.clip(k, 0, None)] + width / 2)
    counts = np.bincount(k[ok], minlength=alpha.size)[: alpha.size]
    with np.errstate(divide="ignore"):
        d = np.where(counts > 0, np.log2(np.maximum(counts, 1)) / j, -np.inf)
    return SpectrumTable(alpha=alpha, width=width, d_hat=d, counts=counts, j=j,
                         prefactor=float(C), typical_exponent=float(-slope),
                         kind=kind.value,
                         exponents=a if keep_exponents else None)
