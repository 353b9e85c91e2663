import cmath
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from riemannlab import _phase
from riemannlab.exp_sums import (
    SeriesKind,
    SeriesParams,
    curve_trace,
    eval_R,
    eval_R_grid,
    eval_R_many,
    eval_R_rational_exact,
    eval_R_tilde,
    eval_weierstrass,
    gauss_sum,
    increment_prefactor,
    nls_truncated,
    profile_at_zero,
)
from riemannlab._validation import ValidationError

reals = st.floats(min_value=-10, max_value=10, allow_nan=False)


def direct_R(x0, t, N):
    """Plain-loop oracle with phases reduced through Fractions."""
    tf, xf = Fraction(t), Fraction(x0)
    total = 0j
    for n in range(-N, N + 1):
        if n == 0:
            continue
        ph = (n * n * tf + n * xf) % 1
        total += cmath.exp(2j * math.pi * float(ph)) / (n * n)
    return total


class TestPhase:
    """Error-free transformations against exact rational arithmetic."""

    @given(st.integers(1, 2 ** 26), st.floats(0, 1, allow_nan=False))
    def test_two_prod_exact(self, m, t):
        p, e = _phase.two_prod(float(m), t)
        assert Fraction(p) + Fraction(e) == Fraction(m) * Fraction(t)

    @given(st.integers(1, 2 ** 26), st.floats(0, 1, allow_nan=False))
    def test_frac_product_matches_fraction(self, m, t):
        f = float(_phase.frac_product(np.array([float(m)]), t)[0])
        exact = (Fraction(m) * Fraction(t)) % 1
        d = abs(Fraction(f) - exact)
        assert min(d, 1 - d) <= 2 ** -52
        assert 0.0 <= f < 1.0

    def test_kahan_sum_matches_fsum(self):
        rng = np.random.default_rng(3)
        x = rng.standard_normal(100_000) * 10.0 ** rng.integers(-8, 8, 100_000)
        assert abs(_phase.kahan_sum(x) - math.fsum(x.tolist())) <= 1e-12 * np.abs(x).sum()

    def test_roots_of_unity_quarter_points_exact(self):
        z = _phase.roots_of_unity(8)
        assert z[0] == 1 and z[2] == 1j and z[4] == -1 and z[6] == -1j


class TestEvalR:
    def test_zero_point_partial_sum(self):
        N = 1000
        expected = 2 * math.fsum(1 / n ** 2 for n in range(1, N + 1))
        assert abs(eval_R(0, 0, N) - expected) < 1e-13

    def test_converges_to_two_zeta_two(self):
        assert abs(eval_R(0, 0, 100_000) - math.pi ** 2 / 3) <= 2 / 100_000

    @pytest.mark.parametrize("x0,t", [(0.1, 0.37), (0.5, 0.25), (0.0, 0.123456)])
    def test_matches_direct_summation(self, x0, t):
        assert abs(eval_R(x0, t, 300) - direct_R(x0, t, 300)) < 1e-12

    def test_rational_fast_path_matches_float_path(self):
        t = Fraction(5, 17)
        assert abs(eval_R(0.2, t, 5000) - eval_R(0.2, 5 / 17, 5000)) < 1e-10

    def test_offset_equals_shifted_argument(self):
        t, h = Fraction(1, 4), 2.0 ** -20
        assert abs(eval_R(0, t, 4000, offset=h) - eval_R(0, 0.25 + h, 4000)) < 1e-12

    def test_large_n_phase_is_exact(self):
        # n^2 t with n near 2^20 needs the split product; compare with Fraction phases
        t = 0.3141592653589793
        n = np.arange(2 ** 20 - 50, 2 ** 20, dtype=np.float64)
        f = _phase.frac_product(n * n, t)
        exact = [float((Fraction(int(k) ** 2) * Fraction(t)) % 1) for k in n]
        assert np.max(np.abs(f - exact)) < 1e-15

    @settings(max_examples=30, deadline=None)
    @given(reals, reals)
    def test_periodicity_in_t(self, x0, t):
        assert abs(eval_R(x0, t + 1, 200) - eval_R(x0, t, 200)) < 1e-12

    @settings(max_examples=30, deadline=None)
    @given(reals, reals)
    def test_periodicity_in_x0(self, x0, t):
        assert abs(eval_R(x0 + 1, t, 200) - eval_R(x0, t, 200)) < 1e-12

    @settings(max_examples=30, deadline=None)
    @given(reals, reals)
    def test_conjugation(self, x0, t):
        assert abs(eval_R(x0, t, 200).conjugate() - eval_R(-x0, -t, 200)) < 1e-12

    @settings(max_examples=30, deadline=None)
    @given(reals, reals, st.integers(1, 500))
    def test_tail_contract(self, x0, t, N):
        assert abs(eval_R(x0, t, 2 * N) - eval_R(x0, t, N)) <= 2 / N

    def test_rejects_non_finite(self):
        with pytest.raises(ValidationError):
            eval_R(0, float("nan"), 10)
        with pytest.raises(ValidationError):
            eval_R(float("inf"), 0, 10)
        with pytest.raises(ValidationError):
            eval_R(0, 0, 0)

    def test_many_matches_single(self):
        ts = [0.1, Fraction(1, 3), 0.7]
        v = eval_R_many(0.25, ts, 500)
        assert np.allclose(v, [eval_R(0.25, t, 500) for t in ts], atol=1e-14)


class TestExactEvaluation:
    """Full-series values at rationals via residue classes and Hurwitz zeta."""

    def test_exact_at_zero(self):
        assert abs(eval_R_rational_exact(0, 0) - math.pi ** 2 / 3) < 1e-14

    def test_exact_at_half(self):
        # R_0(1/2) = sum (-1)^n 2/n^2 = -pi^2/6
        assert abs(eval_R_rational_exact(0, Fraction(1, 2)) + math.pi ** 2 / 6) < 1e-14

    @pytest.mark.parametrize("x0,t", [(0, Fraction(1, 4)), (Fraction(1, 3), Fraction(2, 7))])
    def test_exact_against_long_partial_sum(self, x0, t):
        N = 2 ** 20
        assert abs(eval_R_rational_exact(x0, t) - eval_R(x0, t, N)) <= 2 / N

    def test_grid_exact_matches_pointwise_exact(self):
        K = 64
        v = eval_R_grid(Fraction(1, 2), K)
        for k in (0, 1, 5, 32, 63):
            assert abs(v[k] - eval_R_rational_exact(Fraction(1, 2), Fraction(k, K))) < 1e-12

    def test_grid_truncated_matches_eval(self):
        K, N = 256, 3000
        v = eval_R_grid(0.3, K, N)
        for k in (0, 17, 200):
            assert abs(v[k] - eval_R(0.3, Fraction(k, K), N)) < 1e-11

    def test_half_shift_identity(self):
        # R_{1/2}(t) = R_0(t + 1/2)
        K = 128
        a, b = eval_R_grid(Fraction(1, 2), K), eval_R_grid(0, K)
        assert np.max(np.abs(a - np.roll(b, -K // 2))) < 1e-12

    def test_exact_needs_rationals(self):
        with pytest.raises(ValidationError):
            eval_R_rational_exact(0.5, Fraction(1, 3))
        with pytest.raises(ValidationError):
            eval_R_grid(0.5, 64)


class TestEvalRTilde:
    @given(reals, st.integers(1, 300))
    def test_zero_at_origin(self, x0, N):
        assert eval_R_tilde(x0, 0.0, N) == 0

    def test_full_period_value(self):
        assert abs(eval_R_tilde(0, 2 * math.pi, 1000) - 2j * math.pi) < 1e-12

    @settings(max_examples=30, deadline=None)
    @given(reals, st.floats(-7, 7), st.integers(1, 300))
    def test_tail(self, x0, t, N):
        assert abs(eval_R_tilde(x0, t, 2 * N) - eval_R_tilde(x0, t, N)) <= 4 / N

    def test_direct_formula(self):
        x0, t, N = 0.7, 1.3, 50
        n = np.array([k for k in range(-N, N + 1) if k])
        direct = 1j * t + np.sum((np.exp(1j * n ** 2 * t) - 1) / n ** 2 * np.exp(1j * n * x0))
        assert abs(eval_R_tilde(x0, t, N) - direct) < 1e-12

    def test_vectorised(self):
        t = np.linspace(0, 1, 7)
        v = eval_R_tilde(0.2, t, 40)
        assert v.shape == (7,)
        assert abs(v[3] - eval_R_tilde(0.2, t[3], 40)) < 1e-15


class TestWeierstrass:
    @pytest.mark.parametrize("N", [1, 5, 30])
    def test_at_zero(self, N):
        assert eval_weierstrass(0.0, N) == pytest.approx(1 - 2.0 ** -N, abs=1e-15)

    def test_hand_value(self):
        assert eval_weierstrass(math.pi / 2, 3) == pytest.approx(7 / 8, abs=1e-14)

    @settings(max_examples=30, deadline=None)
    @given(st.floats(-3, 3))
    def test_period(self, t):
        assert abs(eval_weierstrass(t + 2 * math.pi, 12) - eval_weierstrass(t, 12)) < 1e-9

    def test_tail(self):
        t = np.linspace(0, 6, 11)
        assert np.max(np.abs(eval_weierstrass(t, 40) - eval_weierstrass(t, 20))) <= 2.0 ** -20


class TestGaussSum:
    def test_trivial(self):
        g = gauss_sum(1, 0, 1)
        assert g.value == 1 and g.modulus == 1

    def test_zero_case(self):
        g = gauss_sum(1, 0, 2)
        assert abs(g.value) < 1e-15 and g.zero_class

    def test_modulus_sqrt3(self):
        assert gauss_sum(1, 0, 3).modulus == pytest.approx(math.sqrt(3), abs=1e-12)

    def test_rejects_non_coprime(self):
        with pytest.raises(ValidationError):
            gauss_sum(2, 0, 4)

    def test_oracle_q_up_to_50(self):
        for q in range(1, 51):
            for p in range(q):
                if math.gcd(p, q) != 1:
                    continue
                for b in range(q):
                    g = gauss_sum(p, b, q)
                    assert g.zero_class == (g.modulus < 1e-9)
                    if q % 2:
                        assert abs(g.modulus - math.sqrt(q)) < 1e-9
                    else:
                        assert min(abs(g.modulus - m) for m in (0, math.sqrt(2 * q))) < 1e-9

    def test_matches_cmath_loop(self):
        p, b, q = 3, 5, 11
        direct = sum(cmath.exp(2j * math.pi * (p * r * r + b * r) / q) for r in range(q))
        assert abs(gauss_sum(p, b, q).value - direct) < 1e-12


class TestNLS:
    @pytest.mark.parametrize("M", [0, 1, 7, 100])
    def test_origin(self, M):
        assert nls_truncated(M, 0.0, 0.0) == 2 * M + 1

    def test_hand_value(self):
        assert abs(nls_truncated(1, math.pi, math.pi) - 3) < 1e-14

    def test_period_gives_dirichlet_kernel(self):
        M, x = 6, 0.4
        dk = sum(cmath.exp(1j * n * x) for n in range(-M, M + 1))
        assert abs(nls_truncated(M, 2 * math.pi, x) - dk) < 1e-12
        assert abs(nls_truncated(M, 0.0, x) - dk) < 1e-12

    def test_derivative_by_finite_difference(self):
        M, t, x, h = 5, 0.7, 0.3, 1e-6
        _, ux = nls_truncated(M, t, x, derivative=True)
        fd = (nls_truncated(M, t, x + h) - nls_truncated(M, t, x - h)) / (2 * h)
        assert abs(ux - fd) < 1e-6


class TestCurveTrace:
    def test_endpoints(self):
        tr = curve_trace(0, 0, 2 * math.pi, 2, 100)
        assert tr.points[0] == 0
        assert abs(tr.points[1] - 2j * math.pi) < 1e-12

    @pytest.mark.parametrize("x0", [0.0, 0.1, 1.0])
    def test_closed_curve(self, x0):
        N = 64
        tr = curve_trace(x0, 0, 2 * math.pi, 9, N)
        assert abs(tr.points[-1] - 2j * math.pi) <= 4 / N
        assert len(tr.points) == len(tr.t_grid)

    def test_rejects_bad_range(self):
        with pytest.raises(ValidationError):
            curve_trace(0, 1, 0, 5, 10)
        with pytest.raises(ValidationError):
            curve_trace(0, 0, 1, 1, 10)


class TestSeriesParams:
    def test_tolerance_to_truncation(self):
        p = SeriesParams.from_tolerance("R", 1e-3)
        assert p.N >= 2000 and p.tail_bound() <= 1e-3

    def test_evaluate_dispatch(self):
        p = SeriesParams(kind=SeriesKind.WEIERSTRASS, N=3)
        assert p.evaluate(math.pi / 2) == pytest.approx(7 / 8)

    def test_invalid(self):
        with pytest.raises(ValidationError):
            SeriesParams(kind="R", N=0)
        with pytest.raises(ValueError):
            SeriesParams(kind="bogus")


class TestProfileConstant:
    """|F(0)| against an independent oscillatory quadrature."""

    def test_closed_form_matches_quadrature(self):
        # int_R (e^{2 pi i xi^2} - 1)/xi^2 dxi: smooth part on |xi| <= 1, then
        # u = xi^2 on [1, inf) with Fourier-weighted quadrature
        inner_re = integrate.quad(lambda x: (math.cos(2 * math.pi * x * x) - 1) / x ** 2, 0, 1)[0]
        inner_im = integrate.quad(lambda x: math.sin(2 * math.pi * x * x) / x ** 2, 0, 1)[0]
        w = 2 * math.pi
        cos_tail = integrate.quad(lambda u: u ** -1.5, 1, np.inf, weight="cos", wvar=w)[0]
        sin_tail = integrate.quad(lambda u: u ** -1.5, 1, np.inf, weight="sin", wvar=w)[0]
        value = complex(2 * inner_re + cos_tail - 2.0, 2 * inner_im + sin_tail)
        assert abs(value - profile_at_zero()) < 1e-7
        assert increment_prefactor() == pytest.approx(2 * math.sqrt(2) * math.pi)
