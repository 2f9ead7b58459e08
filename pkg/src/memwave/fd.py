"""Time-domain finite-difference oracle for the coupled memory-wave system.

Completely independent of the spectral pipeline: centered second-order
leapfrog in space and time, with the convolution force tracked by an
exponentially-integrated auxiliary field (exact integrating factor,
trapezoidal source).  Dirichlet values are imposed by node substitution;
no mollification, so controls with g(0) != 0 carry an O(dx) boundary
layer that verification tolerances absorb.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

from memwave._kernels import leapfrog_run
from memwave.core import Parameters, TraceSignal


@dataclass(frozen=True)
class FDGrid:
    """Uniform space-time grid on (0, pi) x [0, T], nx interior nodes."""

    nx: int
    dt: float
    nt: int

    def __post_init__(self):
        if self.nx < 16:
            raise ValueError(f"need nx >= 16, got {self.nx}")
        if self.nt < 2 or self.dt <= 0:
            raise ValueError("need nt >= 2 and dt > 0")
        if self.dt > 0.9 * self.dx:
            raise ValueError(
                f"CFL violation: dt = {self.dt:.3e} > 0.9 dx = {0.9 * self.dx:.3e}")

    @property
    def dx(self) -> float:
        return math.pi / (self.nx + 1)

    @property
    def T(self) -> float:
        return self.nt * self.dt

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, math.pi, self.nx + 2)

    @property
    def t(self) -> np.ndarray:
        return np.linspace(0.0, self.T, self.nt + 1)

    @classmethod
    def for_horizon(cls, nx: int, T: float, cfl: float = 0.5) -> "FDGrid":
        """Grid reaching exactly T with dt as close to cfl*dx as allowed."""
        if not (T > 0 and 0 < cfl <= 0.9):
            raise ValueError("need T > 0 and 0 < cfl <= 0.9")
        dx = math.pi / (nx + 1)
        nt = max(2, math.ceil(T / (cfl * dx) - 1e-12))
        return cls(nx=nx, dt=T / nt, nt=nt)


@dataclass(frozen=True)
class StateHistory:
    """Field histories on the full grid (boundary columns included)."""

    grid: FDGrid
    u1: np.ndarray = field(repr=False)
    u2: np.ndarray = field(repr=False)
    w: np.ndarray = field(repr=False)  # interior memory field, same cadence

    def final_velocities(self):
        """(u1_t, u2_t) at t = T by the second-order backward difference."""
        dt = self.grid.dt
        v1 = (3 * self.u1[-1] - 4 * self.u1[-2] + self.u1[-3]) / (2 * dt)
        v2 = (3 * self.u2[-1] - 4 * self.u2[-2] + self.u2[-3]) / (2 * dt)
        return v1, v2


def _memory_field(u1: np.ndarray, dx: float, dt: float, eta: float) -> np.ndarray:
    """W(t_k, x) = int_0^{t_k} e^{-eta(t_k-s)} u1_xx(s, x) ds at interior nodes.

    Same exponential-trapezoid recursion as the stepper; reconstructed from
    the stored history, so it is exact only at store cadence 1.
    """
    L = (u1[:, :-2] - 2.0 * u1[:, 1:-1] + u1[:, 2:]) / (dx * dx)
    q = math.exp(-eta * dt)
    src = 0.5 * dt * (q * L[:-1] + L[1:])
    w = np.zeros_like(L)
    w[1:] = lfilter([1.0], [1.0, -q], src, axis=0)
    return w


def _sample_control(g, t: np.ndarray) -> np.ndarray:
    if g is None:
        return np.zeros_like(t)
    if isinstance(g, TraceSignal):
        return np.asarray(g(t), dtype=float)
    arr = np.asarray(g, dtype=float)
    if arr.shape != t.shape:
        raise ValueError(f"control samples have shape {arr.shape}, grid wants {t.shape}")
    return arr


def simulate_controlled(params: Parameters, g1, g2, grid: FDGrid,
                        initial=None) -> StateHistory:
    """Leapfrog run with Dirichlet controls at x = pi (zero at x = 0).

    g1, g2 may be TraceSignals (linearly resampled onto the grid), arrays of
    nt+1 samples, or None for homogeneous.  `initial`, when given, is a
    4-tuple (u1, v1, u2, v2) of arrays over the full grid; boundary values
    at x = pi are overwritten by the controls at t = 0.
    """
    t = grid.t
    g1s = _sample_control(g1, t)
    g2s = _sample_control(g2, t)
    if initial is None:
        u1 = np.zeros(grid.nx + 2)
        v1 = np.zeros(grid.nx + 2)
        u2 = np.zeros(grid.nx + 2)
        v2 = np.zeros(grid.nx + 2)
    else:
        u1, v1, u2, v2 = (np.array(f, dtype=float) for f in initial)
    u1[0] = u2[0] = 0.0
    u1[-1] = g1s[0]
    u2[-1] = g2s[0]
    h1, h2 = leapfrog_run(params.beta, params.eta, params.a, params.b,
                          u1, u2, v1, v2, g1s, g2s, grid.dx, grid.dt, grid.nt)
    for name, h in (("u1", h1), ("u2", h2)):
        bad = ~np.all(np.isfinite(h), axis=1)
        if np.any(bad):
            raise FloatingPointError(
                f"{name} lost finiteness at step {int(np.argmax(bad))} "
                f"of {grid.nt}; check the CFL condition")
    w = _memory_field(h1, grid.dx, grid.dt, params.eta)
    return StateHistory(grid=grid, u1=h1, u2=h2, w=w)


def modal_fields(data, x: np.ndarray):
    """(u1, v1, u2, v2) field samples of finite-mode data on the grid x."""
    u1 = np.zeros_like(x)
    v1 = np.zeros_like(x)
    u2 = np.zeros_like(x)
    v2 = np.zeros_like(x)
    for n, d in enumerate(data, 1):
        s = np.sin(n * x)
        u1 += d.alpha1 * s
        v1 += d.rho1 * s
        u2 += d.alpha2 * s
        v2 += d.rho2 * s
    return u1, v1, u2, v2


def simulate_homogeneous(params: Parameters, data, grid: FDGrid) -> StateHistory:
    """Homogeneous-boundary run from finite-mode initial data."""
    return simulate_controlled(params, None, None, grid,
                               initial=modal_fields(data, grid.x))


_EDGE_STENCIL = np.array([0.25, -4.0 / 3.0, 3.0, -4.0, 25.0 / 12.0])


def boundary_trace_fd(history: StateHistory):
    """(z1x, z2x) at x = pi via the one-sided 4th-order difference."""
    grid = history.grid
    if grid.nx < 5:
        raise ValueError("need at least 5 interior nodes for the edge stencil")
    T = grid.T
    z1 = history.u1[:, -5:] @ _EDGE_STENCIL / grid.dx
    z2 = history.u2[:, -5:] @ _EDGE_STENCIL / grid.dx
    return TraceSignal(0.0, T, z1), TraceSignal(0.0, T, z2)
