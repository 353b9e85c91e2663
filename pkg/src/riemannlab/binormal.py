"""Parallel-transport frames driven by truncated Schrödinger sums and the
leading-order corner trajectory.

Frames are stored as 3x3 matrices whose rows are (T, e1, e2).  The time
evolution is F_t = G(t) F with the skew generator

    G = [[0, -b_x, a_x], [b_x, 0, -(a^2 + b^2 - A)/2], [-a_x, (a^2 + b^2 - A)/2, 0]]

for u = a + i b.  Each step applies exp(h G) exactly (Rodrigues), so the
rows stay orthonormal up to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import exp_sums
from ._validation import NumericalError, ValidationError, check_int, check_real

ORTHO_TOL = 1e-10


@dataclass(frozen=True)
class Frame:
    T: np.ndarray
    e1: np.ndarray
    e2: np.ndarray

    @classmethod
    def standard(cls):
        return cls(np.array([1.0, 0, 0]), np.array([0, 1.0, 0]), np.array([0, 0, 1.0]))

    @classmethod
    def from_matrix(cls, F):
        F = np.asarray(F, dtype=np.float64)
        return cls(F[0].copy(), F[1].copy(), F[2].copy())

    def matrix(self):
        return np.vstack([self.T, self.e1, self.e2])

    def orthonormality_error(self):
        F = self.matrix()
        return float(max(np.max(np.abs(F @ F.T - np.eye(3))),
                         abs(np.linalg.det(F) - 1.0)))

    def validate(self, tol=ORTHO_TOL):
        F = self.matrix()
        if F.shape != (3, 3) or not np.all(np.isfinite(F)):
            raise ValidationError("frame vectors must be finite 3-vectors")
        if self.orthonormality_error() > tol:
            raise ValidationError("frame is not right-handed orthonormal")
        return self


@dataclass(frozen=True)
class Trajectory:
    t_grid: np.ndarray
    positions: np.ndarray

    def __len__(self):
        return len(self.t_grid)


def _check_grid(t_grid):
    t = np.asarray(t_grid, dtype=np.float64)
    if t.ndim != 1 or t.size < 1 or not np.all(np.isfinite(t)):
        raise ValidationError("t_grid must be a finite 1-d array")
    if t.size > 1 and np.any(np.diff(t) <= 0):
        raise ValidationError("t_grid must be strictly increasing")
    return t


def trajectory_leading(x0, M, t_grid):
    """sum_{|n|<=M} (e^{i n^2 t} - 1)/(i n^2) e^{i n x0}, with n = 0 giving t.

    This is the termwise antiderivative of the truncated sum
    sum e^{i n^2 tau + i n x0} from 0 to t.
    """
    x0 = float(check_real(x0, "x0"))
    M = check_int(M, "M", min_value=0, max_value=exp_sums.MAX_TERMS)
    t = _check_grid(t_grid)
    out = t.astype(np.complex128)
    if M == 0:
        return Trajectory(t, out)
    n = np.arange(1, M + 1, dtype=np.float64)
    w = 2.0 * np.cos(n * x0) / (1j * n * n)
    for i, ti in enumerate(t):
        ph = np.exp(1j * (n * n) * ti) - 1.0
        out[i] += np.sum(w * ph)
    return Trajectory(t, out)


def _rotation(omega, h):
    """exp(h K) for the skew matrix K of a frame generator.

    K = [[0, -c, b], [c, 0, -a], [-b, a, 0]] with omega = (a, b, c), i.e.
    K v = omega x v, so Rodrigues applies directly.
    """
    w = h * np.asarray(omega, dtype=np.float64)
    theta = math.sqrt(float(w @ w))
    K = np.array([[0.0, -w[2], w[1]], [w[2], 0.0, -w[0]], [-w[1], w[0], 0.0]])
    if theta < 1e-8:
        s, c = 1.0 - theta ** 2 / 6, 0.5 - theta ** 2 / 24
    else:
        s, c = math.sin(theta) / theta, (1.0 - math.cos(theta)) / theta ** 2
    return np.eye(3) + s * K + c * (K @ K)


def _generator(u, ux, A):
    """omega with K(omega) equal to the frame generator at one instant."""
    half = 0.5 * (abs(u) ** 2 - A)
    # G[0,1] = -Im u_x, G[0,2] = Re u_x, G[1,2] = -half
    return np.array([half, ux.real, ux.imag])


def frame_evolve(u, A, frame0, t_grid):
    """Frames at every time of ``t_grid`` from the generator driven by u.

    ``u`` is either a callable t -> (u, u_x) or a pair of arrays (u, u_x)
    sampled on ``t_grid``.  With a callable the generator is sampled at step
    midpoints; with arrays the endpoint generators are averaged.  Both are
    second order.  ``A`` is a callable or a constant.
    """
    t = _check_grid(t_grid)
    F = frame0.validate().matrix() if isinstance(frame0, Frame) else Frame.from_matrix(frame0).validate().matrix()
    A_of = A if callable(A) else (lambda _t, a=float(A): a)
    frames = np.empty((t.size, 3, 3))
    frames[0] = F
    if callable(u):
        for k in range(t.size - 1):
            tm = 0.5 * (t[k] + t[k + 1])
            uu, uxx = u(tm)
            if not (np.isfinite(uu) and np.isfinite(uxx)):
                raise NumericalError(f"non-finite u at t={tm}")
            om = _generator(complex(uu), complex(uxx), A_of(tm))
            F = _rotation(om, t[k + 1] - t[k]) @ F
            frames[k + 1] = F
    else:
        uv, uxv = (np.asarray(a, dtype=np.complex128) for a in u)
        if uv.shape != t.shape or uxv.shape != t.shape:
            raise ValidationError("u samples must match t_grid")
        if not (np.all(np.isfinite(uv)) and np.all(np.isfinite(uxv))):
            raise NumericalError("non-finite u samples")
        for k in range(t.size - 1):
            om = 0.5 * (_generator(uv[k], uxv[k], A_of(t[k]))
                        + _generator(uv[k + 1], uxv[k + 1], A_of(t[k + 1])))
            F = _rotation(om, t[k + 1] - t[k]) @ F
            frames[k + 1] = F
    return [Frame.from_matrix(f) for f in frames]


def _nls_driver(M, x0):
    def u(tt):
        return exp_sums.nls_truncated(M, float(tt), x0, derivative=True)
    return u


def corner_trajectory(x0, M, t_grid, frame0=None):
    """Leading-order filament motion at x0 reconstructed from the frames.

    The velocity T x T_x = -b e1 + a e2 (u = a + i b) is integrated by the
    trapezoid rule; the displacement is projected onto the initial
    (e1, e2) plane as z = -i (X.e1 + i X.e2), so that a frozen frame gives
    exactly the integral of u.  The gauge A(t) = |u(t, x0)|^2 removes the
    rotation of (e1, e2) about T that a constant |u| would induce.
    """
    x0 = float(check_real(x0, "x0"))
    M = check_int(M, "M", min_value=0, max_value=4096)
    t = _check_grid(t_grid)
    frame0 = Frame.standard() if frame0 is None else frame0.validate()
    u = _nls_driver(M, x0)

    def A(tt):
        return abs(u(tt)[0]) ** 2

    frames = frame_evolve(u, A, frame0, t)
    uv = np.asarray(exp_sums.nls_truncated(M, t, x0), dtype=np.complex128).reshape(t.shape)
    vel = np.array([-uu.imag * f.e1 + uu.real * f.e2 for uu, f in zip(uv, frames)])
    X = np.zeros_like(vel)
    if t.size > 1:
        dt = np.diff(t)[:, None]
        X[1:] = np.cumsum(0.5 * dt * (vel[1:] + vel[:-1]), axis=0)
    z = -1j * (X @ frame0.e1 + 1j * (X @ frame0.e2))
    return Trajectory(t, z)


def align_phase(z, ref):
    """Rotate z by the unit phase that best matches ref (least squares)."""
    z = np.asarray(z, dtype=np.complex128)
    ref = np.asarray(ref, dtype=np.complex128)
    c = np.vdot(z, ref)
    if abs(c) == 0:
        return z
    return z * (c / abs(c))


def trajectory_gap(x0, M, t_grid):
    """sup_t |corner - leading| after the best global phase rotation."""
    lead = trajectory_leading(x0, M, t_grid).positions
    corner = corner_trajectory(x0, M, t_grid).positions
    return float(np.max(np.abs(align_phase(corner, lead) - lead)))


@dataclass(frozen=True)
class ConvergenceReport:
    steps: np.ndarray
    endpoints: np.ndarray
    differences: np.ndarray
    observed_order: float


def step_convergence(x0, M, t_end, steps=(250, 500, 1000, 2000)):
    """Observed order of corner_trajectory at t_end under step halving.

    With errors e_k = |z(h_k) - z(h_{k+1})| the order is log2(e_k / e_{k+1})
    for the last pair.
    """
    steps = [check_int(s, "steps", min_value=2) for s in steps]
    if len(steps) < 3:
        raise ValidationError("need at least three step counts")
    t_end = float(check_real(t_end, "t_end", min_value=0.0, strict_min=True))
    ends = np.array([corner_trajectory(x0, M, np.linspace(0.0, t_end, s + 1)).positions[-1]
                     for s in steps])
    diffs = np.abs(np.diff(ends))
    if diffs[-1] == 0:
        raise NumericalError("step sequence already converged to rounding")
    return ConvergenceReport(steps=np.array(steps), endpoints=ends,
                             differences=diffs,
                             observed_order=float(np.log2(diffs[-2] / diffs[-1])))
