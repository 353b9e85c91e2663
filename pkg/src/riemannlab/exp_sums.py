"""Riemann-type exponential sums, Weierstrass sums and quadratic Gauss sums.

Conventions
-----------
``R_{x0}(t) = sum_{n != 0} exp(2 pi i (n^2 t + n x0)) / n^2`` has period 1 in
both ``t`` and ``x0``.  ``R~_{x0}(t) = sum_n (exp(i n^2 t) - 1)/n^2 exp(i n x0)``
uses radians (period 2 pi) and carries the n = 0 term ``i t``.

Partial sums pair ``n`` with ``-n``::

    e(n^2 t + n x0) + e(n^2 t - n x0) = 2 cos(2 pi n x0) e(n^2 t)

and accumulate with compensated summation.  Quadratic phases are reduced
modulo 1 exactly (see ``_phase``) or, for rational ``t = a/c``, in integer
arithmetic.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.special import zeta

from . import _phase
from ._validation import (
    ValidationError,
    as_rational,
    check_finite_array,
    check_int,
    check_real,
)

TWO_PI = 2.0 * math.pi
MAX_TERMS = _phase.MAX_EXACT_SQUARE
_ROOT_TABLE_LIMIT = 2 ** 22
_MAX_EXACT_PERIOD = 2 ** 26


class SeriesKind(str, enum.Enum):
    R = "R"
    R_TILDE = "R_tilde"
    WEIERSTRASS = "Weierstrass"


@dataclass(frozen=True)
class SeriesParams:
    """Which sum to evaluate and how far to truncate it.

    ``eps`` is the absolute tail tolerance; ``N`` is the truncation.  Use
    :meth:`from_tolerance` to derive ``N`` from ``eps``.
    """

    kind: SeriesKind
    x0: float = 0.0
    N: int = 1024
    eps: float = 2.0 / 1024

    def __post_init__(self):
        object.__setattr__(self, "kind", SeriesKind(self.kind))
        check_int(self.N, "N", min_value=1, max_value=MAX_TERMS)
        check_real(self.eps, "eps", min_value=0.0, strict_min=True)
        check_real(self.x0, "x0")

    @classmethod
    def from_tolerance(cls, kind, eps, x0=0.0):
        """Smallest N whose tail bound meets ``eps``."""
        eps = check_real(eps, "eps", min_value=0.0, strict_min=True)
        kind = SeriesKind(kind)
        if kind is SeriesKind.WEIERSTRASS:
            # tail sum_{n>N} 2^-n = 2^-N
            n = max(1, math.ceil(-math.log2(eps)))
        else:
            n = max(1, math.ceil(2.0 / eps))
        return cls(kind=kind, x0=x0, N=n, eps=float(eps))

    def tail_bound(self):
        if self.kind is SeriesKind.WEIERSTRASS:
            return 2.0 ** (-self.N)
        return 2.0 / self.N

    def evaluate(self, t):
        if self.kind is SeriesKind.R:
            return eval_R(self.x0, t, self.N)
        if self.kind is SeriesKind.R_TILDE:
            return eval_R_tilde(self.x0, t, self.N)
        return eval_weierstrass(t, self.N)


@dataclass(frozen=True)
class GaussSumResult:
    p: int
    b: int
    q: int
    value: complex
    modulus: float
    zero_class: bool


@dataclass(frozen=True)
class CurveTrace:
    t_grid: np.ndarray
    points: np.ndarray
    x0: float = 0.0
    N: int = 0

    def __len__(self):
        return len(self.t_grid)


# ---------------------------------------------------------------- helpers

def _reduce_unit(x):
    """x mod 1, exact for Fractions and for doubles."""
    if isinstance(x, Fraction):
        return x - math.floor(x)
    return float(x) - math.floor(float(x))


def _pair_weights(x0, n):
    """2 cos(2 pi n x0) / n^2 for positive integers n (float64 array)."""
    nf = n.astype(np.float64)
    rat = as_rational(x0)
    if rat is not None:
        P, Q = rat.numerator % rat.denominator, rat.denominator
        turns = ((n % Q) * P % Q).astype(np.float64) / Q
    else:
        turns = _phase.frac_product(nf, np.float64(_reduce_unit(x0)))
    return 2.0 * np.cos(TWO_PI * turns) / (nf * nf)


class _RiemannSeries:
    """Cached index/weight arrays for repeated evaluation of one R_{x0}."""

    def __init__(self, x0, N):
        self.x0 = x0
        self.N = N
        self.n = np.arange(1, N + 1, dtype=np.int64)
        self.n2 = (self.n * self.n).astype(np.float64)
        self.weights = _pair_weights(x0, self.n)
        self._tables = {}

    def _rational_phase(self, t):
        a, c = t.numerator % t.denominator, t.denominator
        if c >= 2 ** 31:
            raise ValidationError("rational t needs denominator < 2**31")
        k = _phase.rational_square_turns(self.n, a, c)
        if c <= _ROOT_TABLE_LIMIT:
            table = self._tables.get(c)
            if table is None:
                table = self._tables[c] = _phase.roots_of_unity(c)
            return None, table[k]
        return k.astype(np.float64) / c, None

    def value(self, t, offset=0.0):
        """R_{x0}(t + offset), with ``t`` a float or Fraction and ``offset``
        a float added with exact product splitting."""
        if isinstance(t, Fraction) or isinstance(t, int):
            turns, phases = self._rational_phase(Fraction(t))
        else:
            turns = _phase.frac_product(self.n2, np.float64(_reduce_unit(t)))
            phases = None
        if offset:
            off = _phase.frac_product(self.n2, np.float64(offset))
            if phases is not None:
                phases = phases * _phase.unit_phase(off)
            else:
                turns = _phase.frac(turns + off)
        if phases is None:
            phases = _phase.unit_phase(turns)
        return _phase.kahan_sum_complex(self.weights * phases)


# ------------------------------------------------------------ operations

def eval_R(x0, t, N, *, offset=0.0):
    """Partial sum of R_{x0}(t) over 0 < |n| <= N.

    ``t`` and ``x0`` may be floats or :class:`fractions.Fraction`; rational
    ``t`` takes the integer phase path.  ``offset`` is added to ``t`` with
    exact product splitting, so ``eval_R(x0, Fraction(1, 3), N, offset=h)``
    evaluates at 1/3 + h without rounding 1/3.  The truncation error is at
    most 2/N.
    """
    x0 = check_real(x0, "x0")
    t = check_real(t, "t")
    N = check_int(N, "N", min_value=1, max_value=MAX_TERMS)
    offset = check_real(offset, "offset")
    return _RiemannSeries(x0, N).value(t, float(offset))


def eval_R_many(x0, ts, N, *, offsets=None):
    """Evaluate R_{x0} at many points, reusing the term arrays."""
    x0 = check_real(x0, "x0")
    N = check_int(N, "N", min_value=1, max_value=MAX_TERMS)
    series = _RiemannSeries(x0, N)
    ts = list(ts)
    if offsets is None:
        offsets = [0.0] * len(ts)
    return np.array([series.value(t, float(h)) for t, h in zip(ts, offsets)],
                    dtype=np.complex128)


def _hurwitz_pair_sums(L):
    """sum_{m>=0} 1/(s + m L)^2 for s = 1..L."""
    s = np.arange(1, L + 1, dtype=np.float64)
    return zeta(2.0, s / L) / float(L) ** 2


def eval_R_rational_exact(x0, t):
    """The full series R_{x0}(t) at rational t and rational x0.

    Residues n mod L, L = lcm(denominators), group the terms so that each
    class sums to a Hurwitz zeta value; no truncation error remains.
    """
    x = as_rational(x0, "x0")
    tt = as_rational(t, "t")
    if x is None or tt is None:
        raise ValidationError("eval_R_rational_exact needs int/Fraction x0 and t")
    P, Q = x.numerator % x.denominator, x.denominator
    a, c = tt.numerator % tt.denominator, tt.denominator
    L = math.lcm(Q, c)
    if L > _MAX_EXACT_PERIOD:
        raise ValidationError(f"period lcm={L} too large for exact evaluation")
    s = np.arange(1, L + 1, dtype=np.int64)
    w = 2.0 * np.cos(TWO_PI * ((s * P) % Q).astype(np.float64) / Q)
    w *= _hurwitz_pair_sums(L)
    turns = _phase.rational_square_turns(s, a, c).astype(np.float64) / c
    return _phase.kahan_sum_complex(w * _phase.unit_phase(turns))


def eval_R_grid(x0, K, N=None):
    """R_{x0}(k/K) for k = 0..K-1 via one FFT.

    With ``N=None`` and rational ``x0`` the full series is evaluated exactly
    (residue classes mod lcm(K, Q) summed with Hurwitz zeta).  Otherwise the
    partial sum over |n| <= N is used.  Terms are binned by n^2 mod K, so the
    phases are exact integers.
    """
    K = check_int(K, "K", min_value=1, max_value=_MAX_EXACT_PERIOD)
    rat = as_rational(x0, "x0")
    if N is None:
        if rat is None:
            raise ValidationError("exact grid evaluation needs a rational x0 "
                                  "(int or Fraction); pass N for float x0")
        P, Q = rat.numerator % rat.denominator, rat.denominator
        L = math.lcm(K, Q)
        if L > _MAX_EXACT_PERIOD:
            raise ValidationError(f"period lcm={L} too large for exact evaluation")
        s = np.arange(1, L + 1, dtype=np.int64)
        coef = 2.0 * np.cos(TWO_PI * ((s * P) % Q).astype(np.float64) / Q)
        coef *= _hurwitz_pair_sums(L)
        residues = (s % K) * (s % K) % K
    else:
        N = check_int(N, "N", min_value=1, max_value=MAX_TERMS)
        check_real(x0, "x0")
        s = np.arange(1, N + 1, dtype=np.int64)
        coef = _pair_weights(x0, s)
        residues = (s % K) * (s % K) % K
    spectrum = np.bincount(residues, weights=coef, minlength=K)
    return np.fft.ifft(spectrum) * K


def eval_R_tilde(x0, t, N):
    """Partial sum of R~_{x0}(t) = i t + sum_{0<|n|<=N} (e^{i n^2 t} - 1)/n^2 e^{i n x0}.

    ``t`` may be an array.  Phases are computed in turns, t/(2 pi), so
    t = 2 pi maps exactly onto a full period.
    """
    x0 = check_real(x0, "x0")
    N = check_int(N, "N", min_value=1, max_value=MAX_TERMS)
    t_arr = check_finite_array(t, "t")
    n = np.arange(1, N + 1, dtype=np.int64)
    nf = n.astype(np.float64)
    xi = _reduce_unit(float(x0) / TWO_PI)
    w = 2.0 * np.cos(TWO_PI * _phase.frac_product(nf, np.float64(xi))) / (nf * nf)
    n2 = nf * nf
    flat = t_arr.ravel()
    out = np.empty(flat.shape, dtype=np.complex128)
    for i, ti in enumerate(flat):
        tau = _reduce_unit(ti / TWO_PI)
        ph = _phase.unit_phase(_phase.frac_product(n2, np.float64(tau)))
        out[i] = 1j * ti + _phase.kahan_sum_complex(w * (ph - 1.0))
    if t_arr.ndim == 0:
        return complex(out[0])
    return out.reshape(t_arr.shape)


def eval_weierstrass(t, N):
    """W_N(t) = sum_{n=1..N} cos(4^n t) / 2^n; tail error <= 2^-N.

    4^n t is formed by exponent shifting, which is exact, and the cosine
    argument reduction is correctly rounded, so the value is accurate for
    the given double ``t`` even for large n.
    """
    N = check_int(N, "N", min_value=1, max_value=500)
    t_arr = check_finite_array(t, "t")
    out = np.zeros(t_arr.shape, dtype=np.float64)
    for n in range(1, N + 1):
        out += np.cos(np.ldexp(t_arr, 2 * n)) / 2.0 ** n
    if t_arr.ndim == 0:
        return float(out)
    return out


def gauss_sum(p, b, q):
    """G(p, b, q) = sum_{r=0}^{q-1} e((p r^2 + b r)/q), by direct summation.

    Phases are reduced mod q in integer arithmetic.  ``zero_class`` follows
    the parity rule: q even and q/2, b of different parity.
    """
    p = check_int(p, "p")
    b = check_int(b, "b")
    q = check_int(q, "q", min_value=1, max_value=2 ** 31 - 1)
    if math.gcd(p, q) != 1:
        raise ValidationError(f"gauss_sum needs gcd(p, q) = 1, got p={p}, q={q}")
    r = np.arange(q, dtype=np.int64)
    k = ((p % q) * ((r * r) % q) + (b % q) * r) % q
    counts = np.bincount(k, minlength=q).astype(np.float64)
    roots = _phase.roots_of_unity(q)
    value = complex(math.fsum((counts * roots.real).tolist()),
                    math.fsum((counts * roots.imag).tolist()))
    zero_class = q % 2 == 0 and ((q // 2) - b) % 2 == 1
    return GaussSumResult(p=p, b=b, q=q, value=value, modulus=abs(value),
                          zero_class=zero_class)


def nls_truncated(M, t, x, derivative=False):
    """u_M(t, x) = sum_{|n|<=M} exp(i n^2 t + i n x); optionally also d/dx.

    ``t`` may be an array; returns arrays of the same shape.
    """
    M = check_int(M, "M", min_value=0, max_value=MAX_TERMS)
    x = check_real(x, "x")
    t_arr = check_finite_array(t, "t")
    n = np.arange(-M, M + 1, dtype=np.float64)
    xi = _reduce_unit(float(x) / TWO_PI)
    xturns = _phase.frac_product(n, np.float64(xi))
    flat = t_arr.ravel()
    tau = np.array([_reduce_unit(ti / TWO_PI) for ti in flat])
    # (len(t), 2M+1) phase table
    turns = _phase.frac(_phase.frac_product(n[None, :] ** 2, tau[:, None]) + xturns[None, :])
    ph = _phase.unit_phase(turns)
    u = ph.sum(axis=1)
    if t_arr.ndim == 0:
        u = complex(u[0])
    else:
        u = u.reshape(t_arr.shape)
    if not derivative:
        return u
    ux = (1j * n[None, :] * ph).sum(axis=1)
    if t_arr.ndim == 0:
        return u, complex(ux[0])
    return u, ux.reshape(t_arr.shape)


def curve_trace(x0, t_start, t_end, samples, N):
    """Uniform-grid trace of R~_{x0} on [t_start, t_end] for plotting."""
    t_start = check_real(t_start, "t_start")
    t_end = check_real(t_end, "t_end")
    if not t_start < t_end:
        raise ValidationError("curve_trace needs t_start < t_end")
    samples = check_int(samples, "samples", min_value=2)
    grid = np.linspace(float(t_start), float(t_end), samples)
    return CurveTrace(t_grid=grid, points=eval_R_tilde(x0, grid, N),
                      x0=float(x0), N=int(N))


def profile_at_zero():
    """F(0) = integral of (e^{2 pi i xi^2} - 1)/xi^2 over the real line.

    Closed form 2 i sqrt(2) pi e^{i pi/4}; |F(0)| = 2 sqrt(2) pi is the
    amplitude of the sqrt(h) increment of R_{x0} at integer t.
    """
    return 2j * math.sqrt(2.0) * math.pi * complex(math.cos(math.pi / 4),
                                                 math.sin(math.pi / 4))


def increment_prefactor():
    return abs(profile_at_zero())
