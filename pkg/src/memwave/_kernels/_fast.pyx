# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; see _ref.py for the semantics contract."""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, isfinite

cnp.import_array()


def backward_exp_integral(values, double dt, double rate):
    v = np.ascontiguousarray(values, dtype=np.float64)
    shape = v.shape
    # no negative indices here: wraparound is disabled module-wide
    v2 = v.reshape(-1, shape[len(shape) - 1])
    out = np.zeros_like(v2)
    cdef double[:, ::1] vm = v2
    cdef double[:, ::1] om = out
    cdef Py_ssize_t rows = v2.shape[0], n = v2.shape[1], i, k
    cdef double q = exp(-rate * dt), h = 0.5 * dt, acc
    for i in range(rows):
        acc = 0.0
        for k in range(n - 2, -1, -1):
            acc = q * acc + h * (vm[i, k] + q * vm[i, k + 1])
            om[i, k] = acc
    return out.reshape(shape)


def rk4_mode_states(double beta, double eta, double a, double b, double lam,
                    y0, double dt, Py_ssize_t nsteps, Py_ssize_t stride):
    y = np.array(y0, dtype=np.float64)
    if y.ndim != 2 or y.shape[0] != 5:
        raise ValueError("y0 must have shape (5, m)")
    if nsteps % stride != 0:
        raise ValueError("nsteps must be a multiple of stride")
    cdef Py_ssize_t m = y.shape[1], nsave = nsteps // stride + 1
    out = np.empty((nsave, 5, m))
    out[0] = y
    cdef double[:, :, ::1] om = out
    cdef double[:, ::1] ym = y
    cdef Py_ssize_t k, j, idx
    cdef double f1, p1, f2, p2, w
    cdef double a1, b1, c1, d1, e1
    cdef double a2, b2, c2, d2, e2
    cdef double a3, b3, c3, d3, e3
    cdef double a4, b4, c4, d4, e4
    cdef double t1, t2, t3, t4, t5
    cdef double h = 0.5 * dt, s = dt / 6.0
    for k in range(1, nsteps + 1):
        for j in range(m):
            f1 = ym[0, j]; p1 = ym[1, j]; f2 = ym[2, j]; p2 = ym[3, j]; w = ym[4, j]

            a1 = p1
            b1 = -lam * f1 + beta * lam * w - a * f2
            c1 = p2
            d1 = -lam * f2 - b * f1
            e1 = -eta * w + f1

            t1 = f1 + h * a1; t2 = p1 + h * b1; t3 = f2 + h * c1
            t4 = p2 + h * d1; t5 = w + h * e1
            a2 = t2
            b2 = -lam * t1 + beta * lam * t5 - a * t3
            c2 = t4
            d2 = -lam * t3 - b * t1
            e2 = -eta * t5 + t1

            t1 = f1 + h * a2; t2 = p1 + h * b2; t3 = f2 + h * c2
            t4 = p2 + h * d2; t5 = w + h * e2
            a3 = t2
            b3 = -lam * t1 + beta * lam * t5 - a * t3
            c3 = t4
            d3 = -lam * t3 - b * t1
            e3 = -eta * t5 + t1

            t1 = f1 + dt * a3; t2 = p1 + dt * b3; t3 = f2 + dt * c3
            t4 = p2 + dt * d3; t5 = w + dt * e3
            a4 = t2
            b4 = -lam * t1 + beta * lam * t5 - a * t3
            c4 = t4
            d4 = -lam * t3 - b * t1
            e4 = -eta * t5 + t1

            ym[0, j] = f1 + s * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
            ym[1, j] = p1 + s * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
            ym[2, j] = f2 + s * (c1 + 2.0 * c2 + 2.0 * c3 + c4)
            ym[3, j] = p2 + s * (d1 + 2.0 * d2 + 2.0 * d3 + d4)
            ym[4, j] = w + s * (e1 + 2.0 * e2 + 2.0 * e3 + e4)
        if k % stride == 0:
            idx = k // stride
            for j in range(m):
                om[idx, 0, j] = ym[0, j]
                om[idx, 1, j] = ym[1, j]
                om[idx, 2, j] = ym[2, j]
                om[idx, 3, j] = ym[3, j]
                om[idx, 4, j] = ym[4, j]
    return out


def leapfrog_run(double beta, double eta, double a, double b,
                 u1, u2, v1, v2, g1, g2,
                 double dx, double dt, Py_ssize_t nt, Py_ssize_t store_every=1):
    if nt % store_every != 0:
        raise ValueError("nt must be a multiple of store_every")
    cdef cnp.ndarray[double, ndim=1] u1c = np.array(u1, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] u2c = np.array(u2, dtype=np.float64)
    cdef double[::1] v1m = np.ascontiguousarray(v1, dtype=np.float64)
    cdef double[::1] v2m = np.ascontiguousarray(v2, dtype=np.float64)
    cdef double[::1] g1m = np.ascontiguousarray(g1, dtype=np.float64)
    cdef double[::1] g2m = np.ascontiguousarray(g2, dtype=np.float64)
    cdef Py_ssize_t nx2 = u1c.shape[0], n = nx2 - 2
    cdef Py_ssize_t nsave = nt // store_every + 1
    h1 = np.empty((nsave, nx2))
    h2 = np.empty((nsave, nx2))
    cdef double[:, ::1] h1m = h1
    cdef double[:, ::1] h2m = h2

    cdef cnp.ndarray[double, ndim=1] u1p = u1c.copy()
    cdef cnp.ndarray[double, ndim=1] u2p = u2c.copy()
    cdef cnp.ndarray[double, ndim=1] u1n = np.empty(nx2)
    cdef cnp.ndarray[double, ndim=1] u2n = np.empty(nx2)
    cdef cnp.ndarray[double, ndim=1] w = np.zeros(n)
    cdef cnp.ndarray[double, ndim=1] L1 = np.empty(n)
    cdef cnp.ndarray[double, ndim=1] L1n = np.empty(n)

    cdef double[::1] u1cm = u1c, u2cm = u2c, u1pm = u1p, u2pm = u2p
    cdef double[::1] u1nm = u1n, u2nm = u2n, wm = w, L1m = L1, L1nm = L1n

    cdef double idx2 = 1.0 / (dx * dx), dt2 = dt * dt
    cdef double q = exp(-eta * dt), hh = 0.5 * dt
    cdef Py_ssize_t k, j, sidx
    cdef double lap2, bad
    cdef double[::1] tmp

    h1m[0, :] = u1cm
    h2m[0, :] = u2cm
    for j in range(n):
        L1m[j] = (u1cm[j] - 2.0 * u1cm[j + 1] + u1cm[j + 2]) * idx2

    # first step: Taylor expansion, w(0) = 0
    for j in range(n):
        lap2 = (u2cm[j] - 2.0 * u2cm[j + 1] + u2cm[j + 2]) * idx2
        u1nm[j + 1] = u1cm[j + 1] + dt * v1m[j + 1] + 0.5 * dt2 * (L1m[j] - a * u2cm[j + 1])
        u2nm[j + 1] = u2cm[j + 1] + dt * v2m[j + 1] + 0.5 * dt2 * (lap2 - b * u1cm[j + 1])
    u1nm[0] = 0.0; u2nm[0] = 0.0
    u1nm[nx2 - 1] = g1m[1]; u2nm[nx2 - 1] = g2m[1]
    for j in range(n):
        L1nm[j] = (u1nm[j] - 2.0 * u1nm[j + 1] + u1nm[j + 2]) * idx2
        wm[j] = q * wm[j] + hh * (q * L1m[j] + L1nm[j])
    tmp = u1pm; u1pm = u1cm; u1cm = u1nm; u1nm = tmp
    tmp = u2pm; u2pm = u2cm; u2cm = u2nm; u2nm = tmp
    tmp = L1m; L1m = L1nm; L1nm = tmp
    if store_every == 1:
        h1m[1, :] = u1cm
        h2m[1, :] = u2cm

    for k in range(1, nt):
        for j in range(n):
            lap2 = (u2cm[j] - 2.0 * u2cm[j + 1] + u2cm[j + 2]) * idx2
            u1nm[j + 1] = 2.0 * u1cm[j + 1] - u1pm[j + 1] + dt2 * (L1m[j] - beta * wm[j] - a * u2cm[j + 1])
            u2nm[j + 1] = 2.0 * u2cm[j + 1] - u2pm[j + 1] + dt2 * (lap2 - b * u1cm[j + 1])
        u1nm[0] = 0.0; u2nm[0] = 0.0
        u1nm[nx2 - 1] = g1m[k + 1]; u2nm[nx2 - 1] = g2m[k + 1]
        for j in range(n):
            L1nm[j] = (u1nm[j] - 2.0 * u1nm[j + 1] + u1nm[j + 2]) * idx2
            wm[j] = q * wm[j] + hh * (q * L1m[j] + L1nm[j])
        tmp = u1pm; u1pm = u1cm; u1cm = u1nm; u1nm = tmp
        tmp = u2pm; u2pm = u2cm; u2cm = u2nm; u2nm = tmp
        tmp = L1m; L1m = L1nm; L1nm = tmp
        if (k + 1) % store_every == 0:
            sidx = (k + 1) // store_every
            h1m[sidx, :] = u1cm
            h2m[sidx, :] = u2cm

    bad = 0.0
    for j in range(nx2):
        bad += u1cm[j] + u2cm[j]
    if not isfinite(bad):
        raise FloatingPointError("field blew up; check the CFL condition")
    return h1, h2
