"""Per-mode coefficients: the Vandermonde solve, multipliers, and oracles.

Each mode n carries a pair (f1, f2) solving the coupled second-order system

    f1'' = -lam f1 + beta lam w - a f2,   w' = -eta w + f1,  w(0) = 0,
    f2'' = -lam f2 - b f1,

with initial data (alpha1, rho1, alpha2, rho2).  The first component has the
exact exponential form

    f1(t) = R e^{r t} + 2 Re(C e^{i w t}) + 2 Re(D e^{i z t}),

with (r, w, z) from the characteristic quintic; (R, C, D) solve a 5x5
Vandermonde system driven by the derivatives of f1 at t=0.  The second
component is recovered by the linear operator Y with

    Y(e^{pt}) = -(1/a)(p^2 + lam - beta lam/(eta+p)) e^{pt}
                - (beta lam)/(a (eta+p)) e^{-eta t};

at exact quintic roots the admissibility constraint makes all e^{-eta t}
contributions cancel, so f2 is a plain exponential sum with per-root
multipliers -(1/a)(p^2 + lam - beta lam/(eta+p)).  The classical asymptotic
multipliers c = b/(beta(eta+i w)) and d = (1/a)(z^2 - lam + beta lam/(eta+i z))
and the residual coefficient E are kept alongside: they are the quantities the
windowed frame estimates are phrased in.  (d coincides with the exact zeta
multiplier; c agrees with the exact omega multiplier only asymptotically.)
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from memwave._kernels import rk4_mode_states
from memwave.core import Parameters, TraceSignal
from memwave.spectrum import ModeSpectrum


@dataclass(frozen=True)
class ModeData:
    """Fourier coefficients of the initial data against sin(n x)."""

    alpha1: float
    rho1: float
    alpha2: float
    rho2: float

    def __post_init__(self):
        for name in ("alpha1", "rho1", "alpha2", "rho2"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"mode datum {name} must be finite")

    def as_array(self) -> np.ndarray:
        return np.array([self.alpha1, self.rho1, self.alpha2, self.rho2])


@dataclass(frozen=True)
class ModeCoefficients:
    R: float
    C: complex
    D: complex
    c: complex
    d: complex
    E: float
    m_r: float         # exact f2 multiplier on the e^{rt} part
    m_omega: complex   # exact f2 multiplier on the omega pair (d plays this role for zeta)
    cond: float        # condition estimate of the Vandermonde system


def initial_derivatives(params: Parameters, lam: float, data: ModeData) -> np.ndarray:
    """(f1(0), f1'(0), f1''(0), f1'''(0), f1''''(0)) from the mode system."""
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    beta, eta, a, b = params.beta, params.eta, params.a, params.b
    a1, r1, a2, r2 = data.alpha1, data.rho1, data.alpha2, data.rho2
    return np.array([
        a1,
        r1,
        -lam * a1 - a * a2,
        -lam * r1 + beta * lam * a1 - a * r2,
        (lam * lam - eta * beta * lam + a * b) * a1 + 2.0 * a * lam * a2
        + beta * lam * r1,
    ])


def vandermonde_matrix(spectrum: ModeSpectrum) -> np.ndarray:
    """Real 5x5 system matrix in the unknowns (R, Re C, Im C, Re D, Im D)."""
    iw = 1j * spectrum.omega
    iz = 1j * spectrum.zeta
    A = np.empty((5, 5))
    for k in range(5):
        pw = iw ** k
        pz = iz ** k
        A[k] = [spectrum.r ** k, 2 * pw.real, -2 * pw.imag, 2 * pz.real, -2 * pz.imag]
    return A


def solve_vandermonde(spectrum: ModeSpectrum, init: np.ndarray):
    """(R, C, D) plus the system's condition estimate.

    Solved as a real 5x5 system so conjugate symmetry is exact by
    construction; LU with one step of iterative refinement, since the nodes
    i*omega and i*zeta cluster for large lam.
    """
    A = vandermonde_matrix(spectrum)
    b = np.asarray(init, dtype=float)
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > 1e12:
        raise np.linalg.LinAlgError(
            f"Vandermonde system ill-conditioned at mode n={spectrum.n} "
            f"(cond ~ {cond:.3e})")
    lu, piv = scipy.linalg.lu_factor(A)
    x = scipy.linalg.lu_solve((lu, piv), b)
    x = x + scipy.linalg.lu_solve((lu, piv), b - A @ x)
    resid = np.linalg.norm(A @ x - b)
    if resid > 1e-9 * (1.0 + np.linalg.norm(b)):
        raise np.linalg.LinAlgError(
            f"Vandermonde reconstruction failed at mode n={spectrum.n} "
            f"(residual {resid:.3e})")
    R = float(x[0])
    C = complex(x[1], x[2])
    D = complex(x[3], x[4])
    return R, C, D, float(cond)


def multipliers(params: Parameters, spectrum: ModeSpectrum):
    """The asymptotic multipliers (c, d) of the second component."""
    beta, eta, a, b = params.beta, params.eta, params.a, params.b
    lam = spectrum.lam
    den_w = eta + 1j * spectrum.omega
    den_z = eta + 1j * spectrum.zeta
    if abs(den_w) < 1e-12 or abs(den_z) < 1e-12:
        raise ZeroDivisionError(f"multiplier pole at mode n={spectrum.n}")
    c = b / (beta * den_w)
    d = (spectrum.zeta ** 2 - lam + beta * lam / den_z) / a
    return c, d


def residual_coefficient(params: Parameters, data: ModeData, C: complex,
                         D: complex, spectrum: ModeSpectrum, c: complex) -> float:
    """E = alpha2 - 2 Re(c C) - (2 beta lam / a) Re(D / (eta + i zeta))."""
    den_z = params.eta + 1j * spectrum.zeta
    return float(data.alpha2 - 2.0 * (c * C).real
                 - (2.0 * params.beta * spectrum.lam / params.a) * (D / den_z).real)


def upsilon_apply_exponential(params: Parameters, lam: float, z: complex):
    """Coefficients of Y(e^{zt}) = coeff_same e^{zt} + coeff_decay e^{-eta t}."""
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    den = params.eta + z
    if abs(den) < 1e-12 * (1.0 + abs(z)):
        raise ZeroDivisionError(f"upsilon is singular at z = -eta = {z}")
    coeff_same = -(z * z + lam - params.beta * lam / den) / params.a
    coeff_decay = -params.beta * lam / (params.a * den)
    return coeff_same, coeff_decay


def mode_coefficients(params: Parameters, spectrum: ModeSpectrum,
                      data: ModeData) -> ModeCoefficients:
    """Assemble every per-mode coefficient from data and spectrum."""
    init = initial_derivatives(params, spectrum.lam, data)
    R, C, D, cond = solve_vandermonde(spectrum, init)
    c, d = multipliers(params, spectrum)
    E = residual_coefficient(params, data, C, D, spectrum, c)
    m_r = upsilon_apply_exponential(params, spectrum.lam, complex(spectrum.r))[0]
    m_omega = upsilon_apply_exponential(params, spectrum.lam, 1j * spectrum.omega)[0]
    return ModeCoefficients(R=R, C=C, D=D, c=c, d=d, E=E,
                            m_r=float(m_r.real), m_omega=m_omega, cond=cond)


def mode_series_eval(spectrum: ModeSpectrum, coeffs: ModeCoefficients, t):
    """(f1, f2) at times t from the exact exponential representation."""
    t = np.asarray(t, dtype=float)
    e_r = np.exp(spectrum.r * t)
    e_w = np.exp(1j * spectrum.omega * t)
    e_z = np.exp(1j * spectrum.zeta * t)
    f1 = coeffs.R * e_r + 2.0 * (coeffs.C * e_w).real + 2.0 * (coeffs.D * e_z).real
    f2 = (coeffs.m_r * coeffs.R * e_r
          + 2.0 * (coeffs.m_omega * coeffs.C * e_w).real
          + 2.0 * (coeffs.d * coeffs.D * e_z).real)
    return f1, f2


def _uniform_grid_step(t_grid: np.ndarray) -> float:
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size < 2:
        raise ValueError("t_grid must be a 1-d array with at least 2 points")
    if abs(t[0]) > 1e-12:
        raise ValueError("t_grid must start at 0")
    dts = np.diff(t)
    if np.max(np.abs(dts - dts[0])) > 1e-9 * dts[0]:
        raise ValueError("t_grid must be uniform")
    return float(dts[0])


def mode_ode_oracle_batch(params: Parameters, lam: float, data_rows: np.ndarray,
                          t_grid: np.ndarray, dt: float | None = None):
    """RK4 reference trajectories for a batch of mode data.

    data_rows has shape (m, 4); returns (f1, f2) arrays of shape (len(t_grid), m).
    The integrator substeps each grid interval with dt <= min(1e-3, 0.1/sqrt(lam))
    unless an explicit dt is forced.
    """
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    grid_dt = _uniform_grid_step(t_grid)
    rtlam = math.sqrt(lam)
    if dt is None:
        dt_max = min(1e-3, 0.1 / rtlam)
        stride = max(1, math.ceil(grid_dt / dt_max - 1e-12))
    else:
        stride = max(1, round(grid_dt / dt))
        if abs(stride * dt - grid_dt) > 1e-9 * grid_dt:
            raise ValueError("explicit dt must divide the grid spacing")
    dt_int = grid_dt / stride
    if not 5.0 * dt_int * rtlam < 0.5:
        raise ValueError(
            f"RK4 step too large: 5*dt*sqrt(lam) = {5 * dt_int * rtlam:.3f} >= 0.5")
    rows = np.asarray(data_rows, dtype=float)
    if rows.ndim != 2 or rows.shape[1] != 4:
        raise ValueError("data_rows must have shape (m, 4)")
    m = rows.shape[0]
    y0 = np.zeros((5, m))
    y0[0] = rows[:, 0]
    y0[1] = rows[:, 1]
    y0[2] = rows[:, 2]
    y0[3] = rows[:, 3]
    nsteps = (len(t_grid) - 1) * stride
    states = rk4_mode_states(params.beta, params.eta, params.a, params.b,
                             lam, y0, dt_int, nsteps, stride)
    return states[:, 0, :], states[:, 2, :]


def mode_ode_oracle(params: Parameters, lam: float, data: ModeData,
                    t_grid: np.ndarray, dt: float | None = None):
    """Single-datum RK4 oracle returning (f1, f2) as TraceSignals."""
    f1, f2 = mode_ode_oracle_batch(params, lam, data.as_array()[None, :],
                                   t_grid, dt=dt)
    t_end = float(np.asarray(t_grid)[-1])
    return (TraceSignal(0.0, t_end, f1[:, 0]), TraceSignal(0.0, t_end, f2[:, 0]))
