"""Continued fractions, irrationality exponents and limsup sets of rationals.

Everything that can be exact is exact: continued fractions expand the
binary value of a double as a Fraction, residuals ``t - p/q`` are Fractions,
and measures of finite unions of balls come from an endpoint merge rather
than a grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from . import _phase
from ._validation import (
    InsufficientDepthError,
    NumericalError,
    ValidationError,
    check_int,
    check_real,
)

# A convergent p/q of a double only counts as "the value is rational" when q
# is far below the resolution limit q^2 ~ 1/ulp(t).
_RATIONAL_MARGIN = 64.0


@dataclass(frozen=True)
class ContinuedFraction:
    """Expansion t = [a_0; a_1, ..., a_depth] with convergents p_n/q_n.

    ``exponents[n]`` is mu_n with |t - p_n/q_n| = q_n^(-mu_n); it is nan for
    q_n = 1 and inf when the convergent equals t.  ``stop_reason`` is one of
    ``"depth"``, ``"rational"`` (expansion terminated) or ``"precision"``
    (q_n^2 exceeded 1/ulp(t)).
    """

    target: float
    coefficients: tuple
    convergents: tuple
    exponents: tuple
    stop_reason: str = "depth"
    exact_target: Optional[Fraction] = None

    @property
    def depth(self):
        return len(self.coefficients) - 1

    @property
    def is_rational(self):
        return self.stop_reason == "rational"

    def residual(self, n):
        p, q = self.convergents[n]
        return abs(self.exact_target - Fraction(p, q))


def _expand(x, depth):
    """Gauss-map expansion of a Fraction; stops after depth+1 coefficients."""
    coeffs = []
    for _ in range(depth + 1):
        a = math.floor(x)
        coeffs.append(a)
        rem = x - a
        if rem == 0:
            return coeffs, True
        x = 1 / rem
    return coeffs, False


def _mu(residual, q):
    if q <= 1:
        return math.nan
    if residual == 0:
        return math.inf
    # log of a Fraction without underflow
    log_r = math.log(residual.numerator) - math.log(residual.denominator)
    return -log_r / math.log(q)


def continued_fraction(t, depth):
    """Continued fraction of ``t`` to ``depth`` partial quotients.

    Floats are expanded exactly (as the binary fraction they represent) and
    the expansion stops at the first convergent beyond double resolution,
    q_n^2 > 1/ulp(t); a float equal to a low-height rational, such as 0.5
    or 1/3, terminates with that rational.  Fractions and ints expand
    exactly to termination or ``depth``.
    """
    depth = check_int(depth, "depth", min_value=1)
    t = check_real(t, "t")
    exact = Fraction(t)
    from_float = isinstance(t, float)
    inv_ulp = 1.0 / math.ulp(abs(float(t))) if from_float and t != 0 else math.inf
    coeffs, terminated = _expand(exact, depth)

    kept_coeffs, convergents, exponents = [], [], []
    p_prev, q_prev, p, q = 0, 1, 1, 0
    reason = "rational" if terminated else "depth"
    for a in coeffs:
        p_prev, q_prev, p, q = p, q, a * p + p_prev, a * q + q_prev
        if from_float and q * q > inv_ulp and convergents:
            reason = "precision"
            break
        kept_coeffs.append(a)
        convergents.append((p, q))
        exponents.append(_mu(abs(exact - Fraction(p, q)), q))
        if from_float and float(Fraction(p, q)) == t and q * q * _RATIONAL_MARGIN <= inv_ulp:
            reason = "rational"
            break
    return ContinuedFraction(
        target=float(t),
        coefficients=tuple(kept_coeffs),
        convergents=tuple(convergents),
        exponents=tuple(exponents),
        stop_reason=reason,
        exact_target=Fraction(p, q) if reason == "rational" else exact,
    )


@dataclass(frozen=True)
class ExponentEstimate:
    """Finite-depth proxy for mu(t) = limsup mu_n.

    ``value`` is None when the expansion terminated (rational t): mu is
    undefined there and callers must branch on ``status``.
    """

    value: Optional[float]
    status: str
    mu_sequence: tuple
    window: tuple = ()


def irrationality_exponent_estimate(cf, *, truncation=False):
    """Max of mu_n over the deepest third of the usable convergents.

    Usable convergents have q_n >= 2 and a finite mu_n; the exact terminal
    convergent of a rational expansion is excluded.  A terminated expansion
    reports "rational" unless ``truncation=True``, which treats an exact
    Fraction as a finite truncation of an irrational number (a Liouville
    partial sum, say) and estimates from the convergents before the end.
    """
    mus = [m for (p, q), m in zip(cf.convergents, cf.exponents)
           if q >= 2 and math.isfinite(m)]
    if cf.is_rational and not truncation:
        return ExponentEstimate(value=None,
                                status="rational, mu undefined (infinite approximation quality)",
                                mu_sequence=tuple(mus))
    if len(mus) < 3:
        raise InsufficientDepthError(
            f"need at least 3 usable convergents, have {len(mus)}")
    start = len(mus) - max(1, math.ceil(len(mus) / 3))
    tail = mus[start:]
    status = "truncation" if cf.is_rational else "irrational"
    return ExponentEstimate(value=max(tail), status=status,
                            mu_sequence=tuple(mus), window=(start, len(mus)))


def totient(q):
    """Euler's phi by trial-division factorization."""
    q = check_int(q, "q", min_value=1)
    result, n, d = q, q, 2
    while d * d <= n:
        if n % d == 0:
            while n % d == 0:
                n //= d
            result -= result // d
        d += 1 if d == 2 else 2
    if n > 1:
        result -= result // n
    return result


def totient_sieve(q_max):
    """phi(0..q_max) as an int64 array (phi(0) = 0), linear sieve."""
    q_max = check_int(q_max, "q_max", min_value=1)
    phi = np.zeros(q_max + 1, dtype=np.int64)
    phi[1] = 1
    is_comp = np.zeros(q_max + 1, dtype=bool)
    primes = []
    for i in range(2, q_max + 1):
        if not is_comp[i]:
            primes.append(i)
            phi[i] = i - 1
        for pr in primes:
            k = i * pr
            if k > q_max:
                break
            is_comp[k] = True
            if i % pr == 0:
                phi[k] = phi[i] * pr
                break
            phi[k] = phi[i] * (pr - 1)
    return phi


# ---------------------------------------------------------- limsup sets

@dataclass(frozen=True)
class LimsupSetSpec:
    """Balls B(p/q, psi(q)) over coprime p in [0, q] and admissible q.

    ``psi`` maps an int64 array of denominators to radii.  A denominator is
    admissible when it is a multiple of ``modulus`` and passes ``predicate``
    (if given).
    """

    psi: Callable[[np.ndarray], np.ndarray]
    modulus: int = 1
    predicate: Optional[Callable[[int], bool]] = None
    name: str = "custom"

    def __post_init__(self):
        check_int(self.modulus, "modulus", min_value=1)

    @classmethod
    def power(cls, mu, modulus=1):
        """psi(q) = q^-mu on q in modulus*N."""
        mu = float(check_real(mu, "mu", min_value=0.0))
        return cls(psi=lambda q: np.asarray(q, dtype=np.float64) ** -mu,
                   modulus=modulus, name=f"q^-{mu:g} on {modulus}N")

    @classmethod
    def zero(cls):
        return cls(psi=lambda q: np.zeros(np.shape(q)), name="zero")

    def admissible(self, q_min, q_max):
        start = max(q_min, 1)
        start += (-start) % self.modulus
        qs = np.arange(start, q_max + 1, self.modulus, dtype=np.int64)
        if self.predicate is not None:
            qs = qs[np.fromiter((bool(self.predicate(int(q))) for q in qs),
                                dtype=bool, count=len(qs))]
        return qs

    def radii(self, qs):
        r = np.asarray(self.psi(np.asarray(qs, dtype=np.int64)), dtype=np.float64)
        r = np.broadcast_to(r, np.shape(qs))
        if np.any(r < 0) or not np.all(np.isfinite(r)):
            raise ValidationError("psi must return finite nonnegative radii")
        return r


@dataclass(frozen=True)
class DuffinSchaefferSeries:
    X: np.ndarray
    partial_sums: np.ndarray
    diagnostic: str
    log_slope: float
    log_intercept: float
    checkpoints: tuple


def duffin_schaeffer_partial_sums(spec, q_max):
    """S(X) = sum_{q<=X admissible} psi(q) phi(q) for X = 1..q_max.

    The diagnostic compares sums at decade checkpoints: when the last decade
    adds less than half of what the previous one added the series is
    reported "convergent", otherwise "divergent (log fit)".  A least-squares
    fit S(X) ~ a log X + b over the checkpoints is returned either way.
    """
    q_max = check_int(q_max, "q_max", min_value=1)
    phi = totient_sieve(q_max).astype(np.float64)
    qs = spec.admissible(1, q_max)
    terms = np.zeros(q_max + 1)
    terms[qs] = spec.radii(qs) * phi[qs]
    partial = np.cumsum(terms)[1:]
    X = np.arange(1, q_max + 1)
    checkpoints = [10 ** k for k in range(1, 32) if 10 ** k <= q_max]
    if q_max not in checkpoints:
        checkpoints.append(q_max)
    S = np.array([partial[c - 1] for c in checkpoints])
    if len(checkpoints) >= 2:
        slope, intercept = np.polyfit(np.log(checkpoints), S, 1)
    else:
        slope, intercept = math.nan, math.nan
    if len(checkpoints) < 3:
        diag = "undetermined (need q_max >= 100)"
    else:
        last, prev = S[-1] - S[-2], S[-2] - S[-3]
        diag = "convergent" if last <= 0.5 * prev else "divergent (log fit)"
    return DuffinSchaefferSeries(X=X, partial_sums=partial, diagnostic=diag,
                                 log_slope=float(slope), log_intercept=float(intercept),
                                 checkpoints=tuple(checkpoints))


@dataclass(frozen=True)
class IntervalUnion:
    """Disjoint, sorted closed intervals inside [0, 1] (rows lo, hi)."""

    intervals: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)))

    @property
    def total_length(self):
        if len(self.intervals) == 0:
            return 0.0
        return math.fsum((self.intervals[:, 1] - self.intervals[:, 0]).tolist())

    def __len__(self):
        return len(self.intervals)

    def contains(self, x):
        x = np.asarray(x, dtype=np.float64)
        if len(self.intervals) == 0:
            return np.zeros(x.shape, dtype=bool)
        k = np.searchsorted(self.intervals[:, 0], x, side="right") - 1
        ok = k >= 0
        kk = np.where(ok, k, 0)
        return ok & (x <= self.intervals[kk, 1])


def _ball_endpoints(spec, q_min, q_max):
    """Endpoints of every admissible ball clipped to [0, 1], unmerged."""
    los, his = [], []
    qs = spec.admissible(q_min, q_max)
    if len(qs) == 0:
        return np.zeros(0), np.zeros(0)
    radii = spec.radii(qs)
    for q, r in zip(qs.tolist(), radii.tolist()):
        if r <= 0:
            continue
        p = np.arange(q + 1, dtype=np.int64)
        p = p[np.gcd(p, q) == 1]
        c = p / q
        los.append(np.clip(c - r, 0.0, 1.0))
        his.append(np.clip(c + r, 0.0, 1.0))
    if not los:
        return np.zeros(0), np.zeros(0)
    return np.concatenate(los), np.concatenate(his)


def merge_intervals(lo, hi):
    """Union of closed intervals [lo_i, hi_i] as an IntervalUnion."""
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    if lo.size == 0:
        return IntervalUnion()
    order = np.argsort(lo, kind="stable")
    lo, hi = lo[order], hi[order]
    reach = np.maximum.accumulate(hi)
    start = np.ones(lo.size, dtype=bool)
    start[1:] = lo[1:] > reach[:-1]
    first = np.flatnonzero(start)
    last = np.append(first[1:] - 1, lo.size - 1)
    return IntervalUnion(np.column_stack([lo[first], reach[last]]))


def limsup_union(spec, q_min, q_max):
    """Exact union of the balls B(p/q, psi(q)) for admissible q in [q_min, q_max]."""
    q_min = check_int(q_min, "q_min", min_value=1)
    q_max = check_int(q_max, "q_max", min_value=1)
    if q_min > q_max:
        raise ValidationError("limsup_union needs q_min <= q_max")
    return merge_intervals(*_ball_endpoints(spec, q_min, q_max))


def monte_carlo_measure(spec, q_min, q_max, n_points=10 ** 7, seed=0):
    """Monte-Carlo estimate of the union's measure and its standard error.

    Independent of the interval merge: samples are sorted once and each ball
    adds +1/-1 to a difference array over sample indices; a sample is
    covered when its running count is positive.
    """
    n_points = check_int(n_points, "n_points", min_value=1)
    lo, hi = _ball_endpoints(spec, q_min, q_max)
    rng = np.random.default_rng(seed)
    x = np.sort(rng.random(n_points))
    a = np.searchsorted(x, lo, side="left")
    b = np.searchsorted(x, hi, side="right")
    diff = (np.bincount(a, minlength=n_points + 1)
            - np.bincount(b, minlength=n_points + 1))
    covered = np.cumsum(diff[:-1]) > 0
    m = covered.mean()
    return float(m), float(math.sqrt(max(m * (1 - m), 0.0) / n_points))


@dataclass(frozen=True)
class JarnikResult:
    slope: float
    intercept: float
    js: np.ndarray
    counts: np.ndarray
    mu: float
    modulus: int


def _box_count(mu, j, modulus):
    delta = 2.0 ** -j
    cutoff = int(math.floor(2.0 ** (j / mu) * (1 + 1e-12)))
    # shell (cutoff/2, cutoff]: the small-q balls are counted at coarser scales
    q_lo = cutoff // 2 + 1
    q_lo += (-q_lo) % modulus
    qs = np.arange(q_lo, cutoff + 1, modulus, dtype=np.int64)
    if len(qs) == 0:
        return 0
    lo_list, hi_list = [], []
    n_boxes = 2 ** j
    for q in qs.tolist():
        p = np.arange(q + 1, dtype=np.int64)
        p = p[np.gcd(p, q) == 1]
        r = float(q) ** -mu
        c = p / q
        lo_list.append(np.floor(np.clip(c - r, 0.0, 1.0) / delta))
        hi_list.append(np.floor(np.clip(c + r, 0.0, 1.0) / delta))
    lo = np.minimum(np.concatenate(lo_list), n_boxes - 1)
    hi = np.minimum(np.concatenate(hi_list), n_boxes - 1)
    order = np.argsort(lo, kind="stable")
    lo = lo[order]
    reach = np.maximum.accumulate(hi[order])
    start = np.ones(lo.size, dtype=bool)
    start[1:] = lo[1:] > reach[:-1]
    first = np.flatnonzero(start)
    last = np.append(first[1:] - 1, lo.size - 1)
    return int(np.sum(reach[last] - lo[first] + 1))


def jarnik_box_dimension(Q, mu, j_range):
    """Box-counting slope of the balls B(p/q, q^-mu) at dyadic scales 2^-j.

    At scale delta = 2^-j only denominators in the shell
    (delta^(-1/mu)/2, delta^(-1/mu)] are used, restricted to q in 4Q*N when
    ``Q`` is an integer; ``Q=None`` means no restriction.
    """
    mu = float(check_real(mu, "mu", min_value=2.0))
    js = np.array(sorted(set(int(j) for j in j_range)))
    if len(js) < 3:
        raise ValidationError("jarnik_box_dimension needs at least 3 scales")
    if js[0] < 1 or js[-1] > 40:
        raise ValidationError("scales must lie in 1..40")
    modulus = 1 if Q is None else 4 * check_int(Q, "Q", min_value=1)
    counts = np.array([_box_count(mu, int(j), modulus) for j in js])
    if np.any(counts <= 0):
        raise NumericalError("empty box count at some scale; raise the scales")
    slope, intercept = np.polyfit(js, np.log2(counts), 1)
    return JarnikResult(slope=float(slope), intercept=float(intercept),
                        js=js, counts=counts, mu=mu, modulus=modulus)


@dataclass(frozen=True)
class Approximation:
    p: int
    q: int
    mu: float


def constrained_best_approximations(t, Q, q_max):
    """Best coprime p/q for every q in 4Q*N up to q_max, best mu first.

    ``t`` is reduced mod 1 first, so the result depends only on t mod 1.
    mu_q = -log|t - p/q| / log q, with the residual formed exactly.
    """
    t = check_real(t, "t")
    Q = check_int(Q, "Q", min_value=1)
    q_max = check_int(q_max, "q_max", min_value=1)
    tf = float(t) - math.floor(float(t))
    step = 4 * Q
    out = []
    for q in range(step, q_max + 1, step):
        hi, lo = _phase.two_prod(float(q), tf)
        base = math.floor(hi + lo)
        best = None
        # nearest coprime numerator, searching outward
        for d in range(0, q + 1):
            for p in ((base - d, base + 1 + d) if d else (base, base + 1)):
                if 0 <= p <= q and math.gcd(p, q) == 1:
                    res = abs((hi - p) + lo)
                    if best is None or res < best[1]:
                        best = (p, res)
            if best is not None:
                break
        p, res = best
        mu = math.inf if res == 0 else -math.log(res / q) / math.log(q)
        out.append(Approximation(p=p, q=q, mu=mu))
    out.sort(key=lambda a: (-a.mu, a.q))
    return out
