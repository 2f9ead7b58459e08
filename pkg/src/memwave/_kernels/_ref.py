"""Pure numpy/scipy reference implementations of the numerical kernels.

Semantics contract for both backends:

backward_exp_integral(values, dt, rate)
    J[k] = int_{t_k}^{t_end} exp(-rate (s - t_k)) v(s) ds on a uniform grid,
    evaluated by the exact-exponential trapezoid recursion
        J[k] = q J[k+1] + (dt/2) (v[k] + q v[k+1]),   q = exp(-rate dt),
    J[last] = 0.  Operates along the last axis.

rk4_mode_states(beta, eta, a, b, lam, y0, dt, nsteps, stride)
    Classical RK4 on the 5-dim first-order mode system
        f1' = p1,  p1' = -lam f1 + beta lam w - a f2,
        f2' = p2,  p2' = -lam f2 - b f1,   w' = -eta w + f1,
    y0 shape (5, m).  Returns states at every `stride`-th step including t=0,
    shape (nsteps//stride + 1, 5, m).

leapfrog_run(beta, eta, a, b, u1, u2, v1, v2, g1, g2, dx, dt, nt, store_every)
    Second-order explicit scheme for the coupled string pair on (0, pi) with
    Dirichlet data (0 at x=0, g_i[k] at x=pi, sampled at t_k = k dt).  The
    memory force tracks W = int_0^t exp(-eta(t-s)) (L u1)(s) ds at interior
    nodes by the same exponential-trapezoid recursion.  Returns the stored
    (u1, u2) field histories, shape (nt//store_every + 1, nx+2).
"""

import numpy as np
from scipy.signal import lfilter


def backward_exp_integral(values, dt, rate):
    v = np.asarray(values, dtype=float)
    n = v.shape[-1]
    q = np.exp(-rate * dt)
    s = 0.5 * dt * (v[..., :-1] + q * v[..., 1:])
    y = lfilter([1.0], [1.0, -q], s[..., ::-1], axis=-1)
    out = np.zeros_like(v)
    out[..., : n - 1] = y[..., ::-1]
    return out


def _mode_rhs(beta, eta, a, b, lam, y):
    f1, p1, f2, p2, w = y
    return np.stack([
        p1,
        -lam * f1 + beta * lam * w - a * f2,
        p2,
        -lam * f2 - b * f1,
        -eta * w + f1,
    ])


def rk4_mode_states(beta, eta, a, b, lam, y0, dt, nsteps, stride):
    y = np.array(y0, dtype=float)
    if y.ndim != 2 or y.shape[0] != 5:
        raise ValueError("y0 must have shape (5, m)")
    if nsteps % stride != 0:
        raise ValueError("nsteps must be a multiple of stride")
    out = np.empty((nsteps // stride + 1,) + y.shape)
    out[0] = y
    for k in range(1, nsteps + 1):
        k1 = _mode_rhs(beta, eta, a, b, lam, y)
        k2 = _mode_rhs(beta, eta, a, b, lam, y + 0.5 * dt * k1)
        k3 = _mode_rhs(beta, eta, a, b, lam, y + 0.5 * dt * k2)
        k4 = _mode_rhs(beta, eta, a, b, lam, y + dt * k3)
        y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if k % stride == 0:
            out[k // stride] = y
    return out


def leapfrog_run(beta, eta, a, b, u1, u2, v1, v2, g1, g2, dx, dt, nt,
                 store_every=1):
    u1 = np.array(u1, dtype=float)
    u2 = np.array(u2, dtype=float)
    nx2 = u1.size
    if nt % store_every != 0:
        raise ValueError("nt must be a multiple of store_every")
    r = (dt / dx) ** 2
    q = np.exp(-eta * dt)
    dt2 = dt * dt

    def lap(u):
        # 3-point Laplacian at interior nodes, scaled by dx^-2
        return (u[:-2] - 2.0 * u[1:-1] + u[2:]) / (dx * dx)

    nsave = nt // store_every + 1
    h1 = np.empty((nsave, nx2))
    h2 = np.empty((nsave, nx2))
    h1[0] = u1
    h2[0] = u2

    w = np.zeros(nx2 - 2)
    L1 = lap(u1)
    # first step: Taylor expansion, w(0) = 0
    u1n = np.empty(nx2)
    u2n = np.empty(nx2)
    u1n[1:-1] = u1[1:-1] + dt * v1[1:-1] + 0.5 * dt2 * (L1 - beta * w - a * u2[1:-1])
    u2n[1:-1] = u2[1:-1] + dt * v2[1:-1] + 0.5 * dt2 * (lap(u2) - b * u1[1:-1])
    u1n[0] = 0.0
    u2n[0] = 0.0
    u1n[-1] = g1[1]
    u2n[-1] = g2[1]
    L1n = lap(u1n)
    w = q * w + 0.5 * dt * (q * L1 + L1n)
    u1p, u1c, L1 = u1, u1n, L1n
    u2p, u2c = u2, u2n
    if store_every == 1:
        h1[1] = u1c
        h2[1] = u2c

    for k in range(1, nt):
        u1n = np.empty(nx2)
        u2n = np.empty(nx2)
        u1n[1:-1] = 2.0 * u1c[1:-1] - u1p[1:-1] + dt2 * (L1 - beta * w - a * u2c[1:-1])
        u2n[1:-1] = 2.0 * u2c[1:-1] - u2p[1:-1] + dt2 * (lap(u2c) - b * u1c[1:-1])
        u1n[0] = 0.0
        u2n[0] = 0.0
        u1n[-1] = g1[k + 1]
        u2n[-1] = g2[k + 1]
        L1n = lap(u1n)
        w = q * w + 0.5 * dt * (q * L1 + L1n)
        u1p, u1c, L1 = u1c, u1n, L1n
        u2p, u2c = u2c, u2n
        if (k + 1) % store_every == 0:
            h1[(k + 1) // store_every] = u1c
            h2[(k + 1) // store_every] = u2c

    if not (np.all(np.isfinite(u1c)) and np.all(np.isfinite(u2c))):
        raise FloatingPointError("field blew up; check the CFL condition")
    return h1, h2
