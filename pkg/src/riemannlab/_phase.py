"""Error-free float transformations used for exact-ish phase reduction.

Quadratic phases ``n**2 * t`` lose all fractional digits in plain double
arithmetic once ``n`` reaches ~1e4.  The helpers here keep the product as
an unevaluated sum ``hi + lo`` (Dekker/Veltkamp splitting) so the fractional
part survives up to ``n**2 < 2**53``.
"""

from __future__ import annotations

import math

import numpy as np

_SPLITTER = 134217729.0  # 2**27 + 1
MAX_EXACT_SQUARE = 2 ** 26  # n**2 stays an exact double below this


def two_sum(a, b):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def _split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def two_prod(a, b):
    """Return (p, e) with p = fl(a*b) and a*b = p + e exactly."""
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, err


def frac_product(m, t):
    """Fractional part of m*t in [0, 1), with m, t float arrays (m integral).

    The product is formed exactly as hi + lo before flooring.
    """
    m = np.asarray(m, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    hi, lo = two_prod(m, t)
    f = hi - np.floor(hi)
    f = f + lo
    f -= np.floor(f)
    # f can round up to exactly 1.0
    f[f >= 1.0] -= 1.0
    return f


def frac(x):
    x = np.asarray(x, dtype=np.float64)
    f = x - np.floor(x)
    f[f >= 1.0] -= 1.0
    return f


def unit_phase(turns):
    """exp(2*pi*i*turns) for turns given in [0, 1)."""
    ang = 2.0 * np.pi * np.asarray(turns, dtype=np.float64)
    return np.cos(ang) + 1j * np.sin(ang)


def roots_of_unity(c):
    """e(k/c) for k < c, with the quarter points set exactly."""
    k = np.arange(c, dtype=np.int64)
    z = unit_phase(k.astype(np.float64) / c)
    quarter = (4 * k) % c == 0
    z[quarter] = np.array([1, 1j, -1, -1j])[(4 * k[quarter]) // c]
    return z


def rational_square_turns(n, a, c):
    """Integer residues (n**2 * a) mod c for int64 ``n``; requires c < 2**31."""
    n = np.asarray(n, dtype=np.int64)
    r = n % c
    return ((r * r) % c) * (a % c) % c


def kahan_sum(x, block=8192):
    """Compensated sum of a real array.

    Runs ``block`` Kahan accumulators in parallel over rows of the reshaped
    input, then combines the partial sums with math.fsum.
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.size <= block:
        return math.fsum(x.tolist())
    rows = -(-x.size // block)
    padded = np.zeros(rows * block)
    padded[: x.size] = x
    padded = padded.reshape(rows, block)
    s = np.zeros(block)
    c = np.zeros(block)
    for row in padded:
        y = row - c
        t = s + y
        c = (t - s) - y
        s = t
    return math.fsum(s.tolist() + (-c).tolist())


def kahan_sum_complex(z, block=8192):
    z = np.asarray(z, dtype=np.complex128)
    return complex(kahan_sum(z.real, block), kahan_sum(z.imag, block))
