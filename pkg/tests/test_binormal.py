import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from riemannlab import exp_sums
from riemannlab.binormal import (
    Frame,
    align_phase,
    corner_trajectory,
    frame_evolve,
    step_convergence,
    trajectory_leading,
)
from riemannlab._validation import NumericalError, ValidationError


class TestTrajectoryLeading:
    @settings(max_examples=20, deadline=None)
    @given(st.floats(-4, 4), st.floats(0, 7), st.integers(0, 64))
    def test_identity_with_r_tilde(self, x0, t, M):
        z = trajectory_leading(x0, M, [t]).positions[0]
        assert abs(z - (-1j) * exp_sums.eval_R_tilde(x0, t, max(M, 1) if M else 1)) < 1e-12 or M == 0

    def test_m_zero_is_straight_line(self):
        t = np.linspace(0, 3, 7)
        assert np.array_equal(trajectory_leading(0.4, 0, t).positions, t)

    def test_origin(self):
        assert trajectory_leading(0.2, 10, [0.0]).positions[0] == 0

    @pytest.mark.parametrize("M", [8, 64])
    def test_tail(self, M):
        t = np.linspace(0, 2 * math.pi, 101)
        d = np.abs(trajectory_leading(0.3, M, t).positions
                   - trajectory_leading(0.3, 2 * M, t).positions)
        assert d.max() <= 4 / M


class TestFrameEvolve:
    def test_zero_field(self):
        t = np.linspace(0, 5, 51)
        fr = frame_evolve(lambda s: (0j, 0j), 0.0, Frame.standard(), t)
        assert np.array_equal(fr[-1].matrix(), np.eye(3))

    def test_constant_field_closed_form(self):
        c, t = 2.0, np.linspace(0, 3, 301)
        fr = frame_evolve(lambda s: (math.sqrt(c) + 0j, 0j), 0.0, Frame.standard(), t)
        for k in (100, 300):
            th = c * t[k] / 2
            assert np.allclose(fr[k].T, [1, 0, 0], atol=1e-10)
            assert np.allclose(fr[k].e1, [0, math.cos(th), -math.sin(th)], atol=1e-10)
            assert np.allclose(fr[k].e2, [0, math.sin(th), math.cos(th)], atol=1e-10)

    def test_array_samples(self):
        t = np.linspace(0, 1, 201)
        u, ux = exp_sums.nls_truncated(3, t, 0.2, derivative=True)
        a = frame_evolve((u, ux), 0.0, Frame.standard(), t)[-1].matrix()
        b = frame_evolve(lambda s: exp_sums.nls_truncated(3, s, 0.2, derivative=True),
                         0.0, Frame.standard(), t)[-1].matrix()
        assert np.max(np.abs(a - b)) < 1e-3

    def test_orthonormality_drift(self):
        t = np.linspace(0, 1, 10_001)
        fr = frame_evolve(lambda s: exp_sums.nls_truncated(8, s, 0.3, derivative=True),
                          0.0, Frame.standard(), t)
        assert max(f.orthonormality_error() for f in fr) <= 1e-10

    def test_rejects_bad_inputs(self):
        bad = Frame(np.array([1.0, 0, 0]), np.array([1.0, 0, 0]), np.array([0, 0, 1.0]))
        with pytest.raises(ValidationError):
            frame_evolve(lambda s: (0j, 0j), 0.0, bad, [0, 1])
        with pytest.raises(NumericalError):
            frame_evolve(lambda s: (complex("nan"), 0j), 0.0, Frame.standard(), [0, 1])
        with pytest.raises(ValidationError):
            frame_evolve(lambda s: (0j, 0j), 0.0, Frame.standard(), [0, 1, 1])


class TestCornerTrajectory:
    def test_m_zero_straight_line(self):
        t = np.linspace(0, 2 * math.pi, 101)
        assert np.max(np.abs(corner_trajectory(0.5, 0, t).positions - t)) < 1e-12

    def test_second_order(self):
        r = step_convergence(0.3, 4, 1.0)
        assert np.all(np.diff(r.differences) < 0)
        assert abs(r.observed_order - 2) < 0.2

    def test_align_phase(self):
        z = np.array([1, 2j, 3 + 1j])
        assert np.allclose(align_phase(z * np.exp(0.7j), z), z)
