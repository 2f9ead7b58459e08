"""Timing comparison of the compiled kernels against the numpy reference.

Run from the repository root:

    python3 benchmarks/bench_kernels.py

Both backends implement the same contract (see memwave._kernels._ref), so
the comparison doubles as an agreement check: each case asserts the two
results match before timing them.
"""

import time

import numpy as np

from memwave._kernels import _ref

try:
    from memwave._kernels import _fast
except ImportError:
    _fast = None


def clock(fn, args, repeat=5):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def cases():
    rng = np.random.default_rng(0)

    values = rng.standard_normal((48, 4097))
    yield ("tail integral, 48 x 4097 samples", "backward_exp_integral",
           (values, 8.0 / 4096, 1.0))

    y0 = rng.standard_normal((5, 50))
    yield ("mode RK4, 6275 steps, batch 50", "rk4_mode_states",
           (0.3, 1.0, 0.1, 0.1, 64.0, y0, 1e-3, 6275, 25))

    nx = 800
    x = np.linspace(0.0, np.pi, nx + 2)
    u1 = np.sin(2 * x)
    u2 = 0.5 * np.sin(x)
    zeros = np.zeros_like(x)
    dx = np.pi / (nx + 1)
    dt = 0.5 * dx
    nt = 4080
    g = np.zeros(nt + 1)
    yield ("leapfrog, nx=800, 4080 steps", "leapfrog_run",
           (0.3, 1.0, 0.1, 0.1, u1.copy(), u2.copy(), zeros.copy(),
            zeros.copy(), g, g, dx, dt, nt, 1))


def main():
    if _fast is None:
        print("compiled backend unavailable; timing the reference only")
    print(f"{'case':38s} {'reference':>11s} {'compiled':>11s} {'speedup':>8s}")
    for label, name, args in cases():
        ref_fn = getattr(_ref, name)
        t_ref = clock(ref_fn, args)
        if _fast is None:
            print(f"{label:38s} {t_ref * 1e3:9.2f} ms {'-':>11s} {'-':>8s}")
            continue
        fast_fn = getattr(_fast, name)
        got = fast_fn(*args)
        want = ref_fn(*args)
        for g_, w_ in zip(np.atleast_1d(got), np.atleast_1d(want)):
            np.testing.assert_allclose(g_, w_, rtol=1e-12, atol=1e-12)
        t_fast = clock(fast_fn, args)
        print(f"{label:38s} {t_ref * 1e3:9.2f} ms {t_fast * 1e3:9.2f} ms "
              f"{t_ref / t_fast:7.1f}x")


if __name__ == "__main__":
    main()
