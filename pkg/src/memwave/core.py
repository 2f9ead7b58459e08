"""Memory kernel, resolvent, and the tail transforms on sampled traces.

The viscoelastic component carries the convolution kernel k(t) = beta*exp(-eta*t)
with 0 < beta < eta.  Boundary-control synthesis needs the "tail" map

    psi(t) = phi(t) - beta * int_t^T exp(-eta(s-t)) phi(s) ds

and its inverse, given by variation of constants with the resolvent kernel
rho(t) = beta*exp((beta-eta)t).  Both are evaluated on uniform grids with a
right-to-left exponential recursion (trapezoid increments), keeping the cost
linear in the number of samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from memwave._kernels import backward_exp_integral


@dataclass(frozen=True)
class Parameters:
    """Model constants: memory strength/decay and the two couplings."""

    beta: float
    eta: float
    a: float
    b: float

    def __post_init__(self):
        for name in ("beta", "eta", "a", "b"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"parameter {name} must be finite, got {v!r}")
        if not 0.0 < self.beta < self.eta:
            raise ValueError(
                f"need 0 < beta < eta, got beta={self.beta}, eta={self.eta}")
        if self.a == 0.0:
            raise ValueError("coupling a must be nonzero")

    def swap_couplings(self) -> "Parameters":
        # the adjoint problem exchanges the roles of a and b
        if self.b == 0.0:
            raise ValueError("coupling b must be nonzero to pose the adjoint problem")
        return Parameters(self.beta, self.eta, self.b, self.a)


@dataclass(frozen=True)
class TraceSignal:
    """A real signal sampled on a uniform grid over [t0, t1]."""

    t0: float
    t1: float
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", vals)
        if vals.ndim != 1 or vals.size < 2:
            raise ValueError("values must be a 1-d sequence with at least 2 samples")
        if not (self.t1 > self.t0):
            raise ValueError(f"need t1 > t0, got [{self.t0}, {self.t1}]")
        if not np.all(np.isfinite(vals)):
            raise ValueError("samples must be finite")

    @property
    def dt(self) -> float:
        return (self.t1 - self.t0) / (self.values.size - 1)

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(self.t0, self.t1, self.values.size)

    @classmethod
    def from_function(cls, f, t0: float, t1: float, num: int) -> "TraceSignal":
        t = np.linspace(t0, t1, num)
        return cls(t0, t1, np.asarray(f(t), dtype=float))

    def __call__(self, t):
        """Linear interpolation onto arbitrary times (clamped at the ends)."""
        return np.interp(t, self.grid, self.values)


def memory_kernel(params: Parameters, t):
    """k(t) = beta * exp(-eta t)."""
    return params.beta * np.exp(-params.eta * np.asarray(t, dtype=float))


def resolvent_kernel(params: Parameters, t):
    """rho(t) = beta * exp((beta - eta) t), the solution of rho - k*rho = k."""
    return params.beta * np.exp((params.beta - params.eta) * np.asarray(t, dtype=float))


def _check_grid(sig: TraceSignal, T: float) -> None:
    tol = 1e-9 * max(1.0, abs(T))
    if abs(sig.t0) > tol or abs(sig.t1 - T) > tol:
        raise ValueError(
            f"signal grid [{sig.t0}, {sig.t1}] does not cover [0, {T}]")


def tail_transform(phi: TraceSignal, params: Parameters, T: float) -> TraceSignal:
    """psi(t) = phi(t) - beta * int_t^T exp(-eta(s-t)) phi(s) ds."""
    _check_grid(phi, T)
    J = backward_exp_integral(phi.values, phi.dt, params.eta)
    return TraceSignal(phi.t0, phi.t1, phi.values - params.beta * J)


def invert_tail_transform(psi: TraceSignal, params: Parameters, T: float) -> TraceSignal:
    """phi(t) = psi(t) + beta * int_t^T exp((beta-eta)(s-t)) psi(s) ds."""
    _check_grid(psi, T)
    J = backward_exp_integral(psi.values, psi.dt, params.eta - params.beta)
    return TraceSignal(psi.t0, psi.t1, psi.values + params.beta * J)
