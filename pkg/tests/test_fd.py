"""Finite-difference solver: grid contracts, convergence, cross-checks
against the exact mode representation."""

import numpy as np
import pytest

from memwave.core import Parameters, TraceSignal
from memwave.fd import (FDGrid, boundary_trace_fd, modal_fields,
                        simulate_controlled, simulate_homogeneous)
from memwave.modes import ModeData
from memwave.series import build_mode_set, eval_solution, eval_velocity
from memwave.series import boundary_trace as spectral_trace


def rel_l2(got, want, axis=None):
    return np.sqrt(np.sum((got - want) ** 2, axis=axis)
                   / np.sum(want ** 2, axis=axis))


class TestGrid:
    def test_properties(self):
        g = FDGrid(nx=100, dt=0.01, nt=200)
        assert g.dx == pytest.approx(np.pi / 101)
        assert g.T == pytest.approx(2.0)
        assert len(g.x) == 102 and g.x[0] == 0.0 and g.x[-1] == pytest.approx(np.pi)
        assert len(g.t) == 201

    def test_too_coarse_in_space(self):
        with pytest.raises(ValueError, match="nx"):
            FDGrid(nx=8, dt=0.01, nt=10)

    def test_degenerate_time_axis(self):
        with pytest.raises(ValueError):
            FDGrid(nx=50, dt=0.01, nt=1)
        with pytest.raises(ValueError):
            FDGrid(nx=50, dt=-0.01, nt=10)

    def test_cfl_guard(self):
        dx = np.pi / 51
        with pytest.raises(ValueError, match="CFL violation"):
            FDGrid(nx=50, dt=dx, nt=10)

    def test_for_horizon_hits_T_exactly(self):
        g = FDGrid.for_horizon(200, 3.0)
        assert g.nt * g.dt == pytest.approx(3.0, rel=1e-15)
        assert g.dt <= 0.5 * g.dx + 1e-15

    def test_for_horizon_validation(self):
        with pytest.raises(ValueError):
            FDGrid.for_horizon(100, -1.0)
        with pytest.raises(ValueError):
            FDGrid.for_horizon(100, 2.0, cfl=0.95)


class TestQuiescent:
    def test_zero_everything_stays_zero(self, params):
        grid = FDGrid(nx=32, dt=0.02, nt=50)
        hist = simulate_controlled(params, None, None, grid)
        assert not np.any(hist.u1) and not np.any(hist.u2) and not np.any(hist.w)

    def test_boundary_rows_carry_the_controls(self, params):
        grid = FDGrid(nx=32, dt=0.02, nt=50)
        g1 = TraceSignal.from_function(lambda t: np.sin(3 * t), 0.0, grid.T, 101)
        g2 = np.linspace(0.0, 1.0, grid.nt + 1)
        hist = simulate_controlled(params, g1, g2, grid)
        assert np.array_equal(hist.u1[:, -1], g1(grid.t))
        assert np.array_equal(hist.u2[:, -1], g2)
        assert not np.any(hist.u1[:, 0]) and not np.any(hist.u2[:, 0])

    def test_control_shape_mismatch(self, params):
        grid = FDGrid(nx=32, dt=0.02, nt=50)
        with pytest.raises(ValueError, match="shape"):
            simulate_controlled(params, np.zeros(7), None, grid)

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")  # poisoned arithmetic
    def test_nonfinite_injection_aborts_with_step(self, params):
        grid = FDGrid(nx=32, dt=0.02, nt=50)
        g1 = np.zeros(grid.nt + 1)
        g1[10] = np.inf
        with pytest.raises(FloatingPointError, match="CFL condition"):
            simulate_controlled(params, g1, None, grid)


class TestSingleMode:
    """Mode n = 2, mixed data, against the exact representation."""

    DATA = [ModeData(0, 0, 0, 0), ModeData(0.8, -0.4, 0.3, 0.6)]

    def test_field_history(self, params):
        grid = FDGrid.for_horizon(800, 3.0)
        hist = simulate_homogeneous(params, self.DATA, grid)
        ms = build_mode_set(params, self.DATA)
        rows = np.linspace(0, grid.nt, 61).round().astype(int)
        err1 = err2 = ref1 = ref2 = 0.0
        for k in rows:
            u1, u2 = eval_solution(ms, grid.t[k], grid.x)
            err1 += np.sum((hist.u1[k] - u1) ** 2)
            err2 += np.sum((hist.u2[k] - u2) ** 2)
            ref1 += np.sum(u1 ** 2)
            ref2 += np.sum(u2 ** 2)
        assert np.sqrt(err1 / ref1) < 0.01
        assert np.sqrt(err2 / ref2) < 0.01

    def test_scattered_points(self, params):
        grid = FDGrid.for_horizon(800, 3.0)
        hist = simulate_homogeneous(params, self.DATA, grid)
        ms = build_mode_set(params, self.DATA)
        rng = np.random.default_rng(9)
        ks = rng.integers(1, grid.nt + 1, size=20)
        js = rng.integers(1, grid.nx + 1, size=20)
        scale = max(np.max(np.abs(hist.u1)), np.max(np.abs(hist.u2)))
        for k, j in zip(ks, js):
            u1, u2 = eval_solution(ms, grid.t[k], grid.x[j:j + 1])
            assert abs(u1[0] - hist.u1[k, j]) < 0.01 * scale
            assert abs(u2[0] - hist.u2[k, j]) < 0.01 * scale

    def test_final_velocities(self, params):
        grid = FDGrid.for_horizon(800, 3.0)
        hist = simulate_homogeneous(params, self.DATA, grid)
        ms = build_mode_set(params, self.DATA)
        v1, v2 = hist.final_velocities()
        w1, w2 = eval_velocity(ms, grid.T, grid.x)
        assert rel_l2(v1, w1) < 0.01
        assert rel_l2(v2, w2) < 0.01

    def test_memory_field(self, params):
        # w should match the convolution of the exact Laplacian history:
        # for mode 2, -4 sin(2x) int_0^t e^{-eta(t-s)} f1(s) ds
        grid = FDGrid.for_horizon(200, 2.0)
        hist = simulate_homogeneous(params, self.DATA, grid)
        ms = build_mode_set(params, self.DATA)
        t = grid.t
        xj = grid.x[40]
        prof = np.sin(2 * xj)
        coef = np.array([eval_solution(ms, tk, np.array([xj]))[0][0] / prof
                         for tk in t])
        conv = np.array([np.trapezoid(np.exp(-params.eta * (tk - t[:k + 1]))
                                      * coef[:k + 1], t[:k + 1])
                         for k, tk in enumerate(t)])
        want = -4.0 * conv * prof
        got = hist.w[:, 39]  # interior column 39 is node x[40]
        assert np.max(np.abs(got - want)) < 5e-3 * max(1.0, np.max(np.abs(want)))


class TestPureWave:
    """b = 0 decouples the second field into a plain string: u2 = sin x cos t."""

    P = Parameters(beta=0.05, eta=1.0, a=0.1, b=0.0)

    def test_energy_conservation(self):
        grid = FDGrid.for_horizon(400, 4.0)
        hist = simulate_homogeneous(self.P, [ModeData(0, 0, 1.0, 0)], grid)
        x, dt = grid.x, grid.dt

        def energy(k):
            v = (hist.u2[k + 1] - hist.u2[k - 1]) / (2 * dt)
            ux = np.gradient(hist.u2[k], x, edge_order=2)
            return 0.5 * np.trapezoid(v * v + ux * ux, x)

        e0, e1 = energy(1), energy(grid.nt - 1)
        assert abs(e1 - e0) / e0 < 1e-5

    def test_trace_is_minus_cosine(self):
        grid = FDGrid.for_horizon(400, 4.0)
        hist = simulate_homogeneous(self.P, [ModeData(0, 0, 1.0, 0)], grid)
        _, z2 = boundary_trace_fd(hist)
        assert rel_l2(z2.values, -np.cos(grid.t)) < 1e-4


class TestRefinement:
    def test_second_order_in_space(self, params):
        # dt tied to dx, so this exercises both refinements at once
        data = [ModeData(0, 0, 0, 0), ModeData(0.8, -0.4, 0.3, 0.6)]
        ms = build_mode_set(params, data)
        errs = []
        for nx in (100, 200, 400):
            grid = FDGrid.for_horizon(nx, 2.0)
            hist = simulate_homogeneous(params, data, grid)
            u1, _ = eval_solution(ms, grid.T, grid.x)
            errs.append(np.sqrt(np.trapezoid((hist.u1[-1] - u1) ** 2, grid.x)))
        orders = np.log2(np.array(errs[:-1]) / errs[1:])
        assert np.all(orders > 1.7) and np.all(orders < 2.3)


class TestTraceExtraction:
    def test_matches_spectral_trace_at_eight_modes(self, params, rng):
        N, T = 8, 6.0
        coef = rng.standard_normal((N, 4)) / np.arange(1, N + 1)[:, None] ** 2
        data = [ModeData(*c) for c in coef]
        grid = FDGrid.for_horizon(800, T)
        hist = simulate_homogeneous(params, data, grid)
        f1, f2 = boundary_trace_fd(hist)
        s1, s2 = spectral_trace(build_mode_set(params, data), grid.t)
        assert rel_l2(f1.values, s1.values) < 0.02
        assert rel_l2(f2.values, s2.values) < 0.02

    def test_needs_five_interior_nodes(self, params):
        grid = FDGrid(nx=32, dt=0.02, nt=10)
        hist = simulate_homogeneous(params, [ModeData(1, 0, 0, 0)], grid)
        f1, _ = boundary_trace_fd(hist)
        assert len(f1.values) == grid.nt + 1


class TestModalFields:
    def test_two_mode_profile(self):
        x = np.linspace(0, np.pi, 64)
        data = [ModeData(1.0, 2.0, 0.0, -1.0), ModeData(0.0, 0.0, 0.5, 0.0)]
        u1, v1, u2, v2 = modal_fields(data, x)
        assert np.allclose(u1, np.sin(x))
        assert np.allclose(v1, 2 * np.sin(x))
        assert np.allclose(u2, 0.5 * np.sin(2 * x))
        assert np.allclose(v2, -np.sin(x))
