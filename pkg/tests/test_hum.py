"""Control synthesis: adjoint reversal, Gram structure, duality pairing,
and the closed loop through the independent FD solver."""

import numpy as np
import pytest
from scipy.integrate import simpson

from memwave.core import Parameters, TraceSignal, tail_transform
from memwave.fd import FDGrid, boundary_trace_fd, simulate_homogeneous
from memwave.hum import (ControlPair, GramSystem, TargetState, _solve_spd,
                         adjoint_traces, basis_index, gram_matrix, rhs_vector,
                         solve_controls, verify_control)
from memwave.modes import ModeData
from memwave.series import boundary_trace, build_mode_set


def random_target(rng, N, decay=2.0):
    c = rng.standard_normal((N, 4)) / np.arange(1, N + 1)[:, None] ** decay
    return TargetState(c[:, 0], c[:, 1], c[:, 2], c[:, 3])


class TestTargetState:
    def test_constructors(self):
        t = TargetState.zero(5)
        assert t.N == 5 and not np.any(t.alpha1)
        s = TargetState.single_mode(5, 3, "rho2", value=2.0)
        assert s.rho2[2] == 2.0 and np.count_nonzero(s.rho2) == 1
        assert not np.any(s.alpha1)

    def test_rejects_bad_shapes(self):
        with pytest.raises(ValueError):
            TargetState(np.ones(3), np.ones(3), np.ones(3), np.ones(2))
        with pytest.raises(ValueError):
            TargetState(np.array([1.0, np.nan]), np.zeros(2),
                        np.zeros(2), np.zeros(2))

    def test_mode_data_round_trip(self, rng):
        t = random_target(rng, 4)
        data = t.as_mode_data()
        assert len(data) == 4
        assert data[2].alpha2 == t.alpha2[2]

    def test_basis_index(self):
        assert basis_index(1, 0) == 0
        assert basis_index(2, 1) == 5
        assert basis_index(7, 3) == 27


class TestAdjointTraces:
    def test_reflection_of_swapped_forward_run(self, params, rng):
        # the adjoint trace is the time-reversed trace of the forward
        # system with couplings swapped and velocities negated
        T, N = 5.0, 4
        target = random_target(rng, N)
        z1, z2 = adjoint_traces(params, target, T, num_samples=801)
        phi = [ModeData(d.alpha1, -d.rho1, d.alpha2, -d.rho2)
               for d in target.as_mode_data()]
        ms = build_mode_set(params.swap_couplings(), phi)
        p1, p2 = boundary_trace(ms, np.linspace(0.0, T, 801))
        assert np.array_equal(z1.values, p1.values[::-1])
        assert np.array_equal(z2.values, p2.values[::-1])

    def test_against_fd_run(self, params, rng):
        T, N = 6.0, 8
        target = random_target(rng, N)
        z1, z2 = adjoint_traces(params, target, T)
        grid = FDGrid.for_horizon(800, T)
        phi = [ModeData(d.alpha1, -d.rho1, d.alpha2, -d.rho2)
               for d in target.as_mode_data()]
        hist = simulate_homogeneous(params.swap_couplings(), phi, grid)
        f1, f2 = boundary_trace_fd(hist)
        for z, f in ((z1, f1), (z2, f2)):
            want = f.values[::-1]
            err = np.sqrt(np.trapezoid((z(grid.t) - want) ** 2, grid.t)
                          / np.trapezoid(want ** 2, grid.t))
            assert err < 0.01

    def test_needs_reversible_couplings(self, rng):
        p = Parameters(beta=0.3, eta=1.0, a=0.1, b=0.0)
        with pytest.raises(ValueError):
            adjoint_traces(p, random_target(rng, 2), 4.0, num_samples=65)


@pytest.fixture(scope="module")
def gram6():
    return gram_matrix(Parameters(beta=0.3, eta=1.0, a=0.1, b=0.1),
                       6, 8.0, num_samples=1025)


class TestGram:

    def test_symmetric_positive(self, gram6):
        G, _, _ = gram6
        assert np.array_equal(G, G.T)
        ev = np.linalg.eigvalsh(G)
        assert ev[0] > 0.5
        assert ev[-1] / ev[0] < 1e3  # observed 153 for this window

    def test_diagonal_matches_direct_quadrature(self, params, gram6):
        G, Z1, Z2 = gram6
        T = 8.0
        j = basis_index(2, 0)
        tail = tail_transform(TraceSignal(0.0, T, Z1[j]), params, T).values
        direct = simpson(tail ** 2 + Z2[j] ** 2, dx=T / 1024)
        assert G[j, j] == pytest.approx(direct, rel=1e-12)

    def test_quadratic_form_nonnegative(self, gram6, rng):
        G, _, _ = gram6
        for _ in range(100):
            c = rng.standard_normal(G.shape[0])
            assert c @ G @ c >= 0.0

    def test_rayleigh_quotient_bracket(self, params):
        # <Gc, c> against the energy of the final data it encodes
        G, _, _ = gram_matrix(params, 12, 8.0)
        rng = np.random.default_rng(5)
        n = np.arange(1, 13)
        for _ in range(100):
            c = rng.standard_normal(48)
            a1, r1, a2, r2 = c[0::4], c[1::4], c[2::4], c[3::4]
            energy = 0.5 * np.pi * np.sum(n ** 2 * (a1 ** 2 + a2 ** 2)
                                          + r1 ** 2 + r2 ** 2)
            assert 0.5 < (c @ G @ c) / energy < 5.0

    def test_entries_converge_in_dt(self, params):
        G1, _, _ = gram_matrix(params, 4, 8.0, num_samples=1025)
        G2, _, _ = gram_matrix(params, 4, 8.0, num_samples=2049)
        G4, _, _ = gram_matrix(params, 4, 8.0, num_samples=4097)
        d12 = np.max(np.abs(G1 - G2))
        d24 = np.max(np.abs(G2 - G4))
        assert 3.0 < d12 / d24 < 5.0  # tail recursion is second order

    def test_gram_system_validation(self):
        bad = np.array([[1.0, 0.5], [0.2, 1.0]])
        with pytest.raises(ValueError, match="symmetry"):
            GramSystem(G=bad, rhs=np.zeros(2), solution=np.zeros(2),
                       condition_estimate=1.0)
        indef = np.array([[1.0, 0.0], [0.0, -1.0]])
        with pytest.raises(ValueError, match="positive"):
            GramSystem(G=indef, rhs=np.zeros(2), solution=np.zeros(2),
                       condition_estimate=1.0)


class TestRhsVector:
    def test_slot_conventions(self):
        N = 4
        half_pi = 0.5 * np.pi
        b = rhs_vector(TargetState.single_mode(N, 2, "alpha1"), N)
        assert b[basis_index(2, 1)] == half_pi
        assert np.count_nonzero(b) == 1
        b = rhs_vector(TargetState.single_mode(N, 3, "rho1"), N)
        assert b[basis_index(3, 0)] == -half_pi
        b = rhs_vector(TargetState.single_mode(N, 1, "alpha2"), N)
        assert b[basis_index(1, 3)] == half_pi
        b = rhs_vector(TargetState.single_mode(N, 4, "rho2"), N)
        assert b[basis_index(4, 2)] == -half_pi

    def test_mode_count_mismatch(self, rng):
        with pytest.raises(ValueError, match="modes"):
            rhs_vector(random_target(rng, 3), 5)


class TestSolver:
    def test_rank_deficient_falls_back_to_cg(self):
        v = np.arange(1.0, 7.0)
        G = np.outer(v, v)
        x, method = _solve_spd(G, v.copy())
        assert method == "cg"
        assert np.linalg.norm(G @ x - v) < 1e-10

    def test_full_rank_uses_cholesky(self, rng):
        A = rng.standard_normal((8, 8))
        G = A @ A.T + 8 * np.eye(8)
        b = rng.standard_normal(8)
        x, method = _solve_spd(G, b)
        assert method == "cholesky"
        assert np.linalg.norm(G @ x - b) < 1e-10 * np.linalg.norm(b)


class TestSolveControls:
    def test_zero_target_zero_controls(self, params):
        controls, gram = solve_controls(params, TargetState.zero(4), 8.0,
                                        num_samples=1025)
        assert not np.any(controls.g1.values)
        assert not np.any(controls.g2.values)
        assert not np.any(gram.solution)

    def test_linearity(self, params, rng):
        T, N, m = 8.0, 4, 1025
        t1 = random_target(rng, N)
        t2 = random_target(rng, N)
        both = TargetState(t1.alpha1 + t2.alpha1, t1.rho1 + t2.rho1,
                           t1.alpha2 + t2.alpha2, t1.rho2 + t2.rho2)
        c1, _ = solve_controls(params, t1, T, num_samples=m)
        c2, _ = solve_controls(params, t2, T, num_samples=m)
        cb, _ = solve_controls(params, both, T, num_samples=m)
        scale = np.max(np.abs(cb.g1.values)) + np.max(np.abs(cb.g2.values))
        assert np.max(np.abs(cb.g1.values - c1.g1.values - c2.g1.values)) < 1e-9 * scale
        assert np.max(np.abs(cb.g2.values - c1.g2.values - c2.g2.values)) < 1e-9 * scale

    def test_short_horizon_is_refused(self, params):
        with pytest.raises(np.linalg.LinAlgError, match="condition"):
            solve_controls(params, TargetState.single_mode(12, 1, "alpha1"),
                           2.0, num_samples=2049)

    def test_condition_degrades_below_threshold(self, params):
        G8, _, _ = gram_matrix(params, 6, 8.0, num_samples=1025)
        G4, _, _ = gram_matrix(params, 6, 4.0, num_samples=1025)
        assert np.linalg.cond(G4) > 100 * np.linalg.cond(G8)


class TestClosedLoop:
    def test_steers_to_first_sine(self, params):
        T, N = 8.0, 6
        target = TargetState.single_mode(N, 1, "alpha1")
        controls, gram = solve_controls(params, target, T, num_samples=2049)
        assert gram.condition_estimate < 1e3
        rep = verify_control(params, controls, target, T,
                             FDGrid.for_horizon(200, T))
        assert rep["max_error"] < 0.08  # observed 0.061 on this coarse grid
        assert rep["target_norm"] == pytest.approx(np.sqrt(np.pi / 2), rel=1e-12)

    def test_zero_run_reports_zero(self, params):
        T = 4.0
        grid = FDGrid.for_horizon(64, T)
        zeros = TraceSignal(0.0, T, np.zeros(grid.nt + 1))
        rep = verify_control(params, ControlPair(zeros, zeros),
                             TargetState.zero(3), T, grid)
        assert rep["max_error"] == 0.0
        assert rep["target_norm"] == 0.0

    def test_horizon_mismatch(self, params):
        T = 4.0
        zeros = TraceSignal(0.0, T, np.zeros(65))
        with pytest.raises(ValueError, match="horizon"):
            verify_control(params, ControlPair(zeros, zeros),
                           TargetState.zero(3), T, FDGrid.for_horizon(64, 5.0))
