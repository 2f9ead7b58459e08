"""Per-mode coefficient tests.

Oracle strategy: an RK4 integration of the first-order mode system is the
independent reference for every series identity; asymptotic multiplier
statements are tested as log-log slope regressions; norm-equivalence
constants were fitted once on a calibration run and are frozen here as
regression bounds.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from memwave.core import Parameters
from memwave.modes import (ModeData, initial_derivatives, mode_coefficients,
                           mode_ode_oracle, mode_series_eval, multipliers,
                           residual_coefficient, solve_vandermonde,
                           upsilon_apply_exponential, vandermonde_matrix)
from memwave.series import random_mode_data
from memwave.spectrum import ModeSpectrum, solve_cubic, solve_quintic, string_spectrum


def series_sup_error(params, n, data, t_grid):
    """sup |series - rk4| over the grid, both components."""
    sp = solve_quintic(params, float(n * n), n=n)
    co = mode_coefficients(params, sp, data)
    f1s, f2s = mode_series_eval(sp, co, t_grid)
    f1o, f2o = mode_ode_oracle(params, sp.lam, data, t_grid)
    return max(np.max(np.abs(f1s - f1o.values)), np.max(np.abs(f2s - f2o.values)))


class TestInitialDerivatives:
    def test_zero_data(self, params):
        out = initial_derivatives(params, 9.0, ModeData(0, 0, 0, 0))
        assert np.all(out == 0)

    def test_printed_example(self, params):
        out = initial_derivatives(params, 4.0, ModeData(1, 0, 0, 0))
        assert np.allclose(out, [1, 0, -4, 1.2, 14.81], atol=1e-14)

    def test_nonpositive_lambda_rejected(self, params):
        with pytest.raises(ValueError):
            initial_derivatives(params, -1.0, ModeData(1, 0, 0, 0))

    @settings(max_examples=80, deadline=None)
    @given(beta=st.floats(0.05, 0.45), eta=st.floats(0.6, 2.0),
           a=st.floats(0.02, 0.4), b=st.floats(-0.4, 0.4),
           lam=st.floats(0.1, 1e4),
           vals=st.lists(st.floats(-10, 10), min_size=4, max_size=4))
    def test_fourth_derivative_identity(self, beta, eta, a, b, lam, vals):
        # f''''(0) is determined by the lower derivatives:
        # f'''' = -2 lam f'' + lam beta f' + (ab - eta lam beta - lam^2) f
        p = Parameters(beta, eta, a, b)
        f = initial_derivatives(p, lam, ModeData(*vals))
        want = (-2 * lam * f[2] + lam * beta * f[1]
                + (a * b - eta * lam * beta - lam * lam) * f[0])
        assert f[4] == pytest.approx(want, rel=1e-12, abs=1e-12)


class TestSolveVandermonde:
    def test_zero_init(self, params):
        sp = solve_quintic(params, 4.0, n=2)
        R, C, D, _ = solve_vandermonde(sp, np.zeros(5))
        assert R == 0 and C == 0 and D == 0

    def test_reconstruction_residual(self, params, rng):
        for n in (1, 4, 16, 64):
            sp = solve_quintic(params, float(n * n), n=n)
            init = initial_derivatives(params, sp.lam, ModeData(*rng.standard_normal(4)))
            R, C, D, cond = solve_vandermonde(sp, init)
            x = np.array([R, C.real, C.imag, D.real, D.imag])
            resid = np.linalg.norm(vandermonde_matrix(sp) @ x - init)
            assert resid <= 1e-9 * (1 + np.linalg.norm(init))
            assert np.isfinite(cond) and cond < 1e12

    def test_leading_order_C_at_n50(self, params):
        sp = solve_quintic(params, 2500.0, n=50)
        init = initial_derivatives(params, sp.lam, ModeData(1, 0, 0, 0))
        _, C, _, _ = solve_vandermonde(sp, init)
        # leading term alpha1/2, 2% band
        assert abs(C.real - 0.5) < 0.01

    def test_series_matches_oracle_n3(self, params):
        t = np.linspace(0.0, 5.0, 641)
        err = series_sup_error(params, 3, ModeData(0.7, -0.3, 0.2, 0.5), t)
        assert err < 1e-6

    def test_degenerate_system_names_mode(self, params):
        # synthetic spectrum with coincident oscillatory nodes
        sp = ModeSpectrum(n=7, lam=4.0, r=-0.5,
                          omega=2.0 + 0.1j, zeta=2.0 + 0.1j + 1e-15)
        with pytest.raises(np.linalg.LinAlgError, match="n=7"):
            solve_vandermonde(sp, np.ones(5))


class TestMultipliers:
    def test_decoupled_c_is_zero(self):
        p = Parameters(0.3, 1.0, 0.1, 0.0)
        sp = solve_quintic(p, 4.0, n=2)
        c, d = multipliers(p, sp)
        assert c == 0
        assert d != 0

    def test_growth_rates(self, params):
        ns = np.arange(5, 51, 5)
        cs, ds = [], []
        for n in ns:
            sp = solve_quintic(params, float(n * n), n=n)
            c, d = multipliers(params, sp)
            cs.append(abs(c))
            ds.append(abs(d))
        slope_c = np.polyfit(np.log(ns), np.log(cs), 1)[0]
        slope_d = np.polyfit(np.log(ns), np.log(ds), 1)[0]
        assert -1.1 < slope_c < -0.9    # |c| ~ 1/sqrt(lam)
        assert 0.9 < slope_d < 1.1      # |d| ~ sqrt(lam)

    def test_independent_evaluation_path(self, params):
        sp = solve_quintic(params, 100.0, n=10)
        c, d = multipliers(params, sp)
        # same quantities, different arithmetic order
        den_w = params.eta + 1j * sp.omega
        c2 = params.b * np.conj(den_w) / (params.beta * abs(den_w) ** 2)
        d2 = (sp.zeta ** 2 - sp.lam) / params.a \
            + params.beta * sp.lam / (params.a * (params.eta + 1j * sp.zeta))
        assert c == pytest.approx(c2, rel=1e-14)
        assert d == pytest.approx(d2, rel=1e-14)


class TestResidualCoefficient:
    def test_zero_data(self, params):
        sp = solve_quintic(params, 4.0, n=2)
        c, _ = multipliers(params, sp)
        assert residual_coefficient(params, ModeData(0, 0, 0, 0), 0j, 0j, sp, c) == 0

    def test_sum_bounded_by_oscillatory_norm(self, params, rng):
        # |sum E_n|^2 <= M sum(|C_n|^2 + |d_n D_n|^2); M frozen at 2
        spectra = string_spectrum(params, 24)
        for _ in range(20):
            data = random_mode_data(rng, 24)
            esum = 0.0
            osc = 0.0
            for sp, d in zip(spectra, data):
                co = mode_coefficients(params, sp, d)
                esum += co.E
                osc += abs(co.C) ** 2 + abs(co.d * co.D) ** 2
            assert esum ** 2 <= 2.0 * osc

    def test_exact_value_reconstruction(self, params, rng):
        # the exact representation reproduces f2(0) = alpha2 up to solver
        # roundoff; the multipliers grow like sqrt(lam), hence the lam factor
        for n in (1, 3, 10, 32):
            sp = solve_quintic(params, float(n * n), n=n)
            d = ModeData(*rng.standard_normal(4))
            co = mode_coefficients(params, sp, d)
            f2_0 = co.m_r * co.R + 2 * (co.m_omega * co.C).real + 2 * (co.d * co.D).real
            tol = 1e-13 * (1 + sp.lam) * (1 + np.linalg.norm(d.as_array()))
            assert abs(f2_0 - d.alpha2) <= tol

    def test_asymptotic_value_reconstruction(self, params, rng):
        # the (c, d, E) representation reproduces f2(0) only to O(1/lam):
        # its omega multiplier is the asymptotic c, not the exact one
        for n in (1, 2, 4, 8, 16, 32, 64):
            sp = solve_quintic(params, float(n * n), n=n)
            d = ModeData(*rng.standard_normal(4))
            co = mode_coefficients(params, sp, d)
            f2_0 = 2 * (co.c * co.C).real + 2 * (co.d * co.D).real + co.E
            scale = np.linalg.norm(d.as_array())
            assert abs(f2_0 - d.alpha2) <= 0.5 * scale / sp.lam


class TestUpsilon:
    def test_annihilates_cubic_root(self, params):
        # z^2 + lam - beta lam/(eta+z) = 0 at the decoupled cubic's pair root
        lam = 16.0
        _, z = solve_cubic(params, lam)
        same, decay = upsilon_apply_exponential(params, lam, z)
        assert abs(same) < 1e-10
        assert abs(decay) > 0

    def test_pole_rejected(self, params):
        with pytest.raises(ZeroDivisionError):
            upsilon_apply_exponential(params, 4.0, complex(-params.eta))

    def test_omega_multiplier_approaches_c(self, params):
        # |same(i omega) - c| / |c| decays like 1/sqrt(lam); frozen band
        for n in (20, 40, 60):
            sp = solve_quintic(params, float(n * n), n=n)
            c, _ = multipliers(params, sp)
            same, _ = upsilon_apply_exponential(params, sp.lam, 1j * sp.omega)
            rel = abs(same - c) / abs(c)
            assert 1.0 <= rel * np.sqrt(sp.lam) <= 2.5

    def test_recombines_second_component(self, params):
        # applying the operator atom-by-atom to f1's five exponentials
        # rebuilds f2; the e^{-eta t} contributions cancel
        n = 4
        sp = solve_quintic(params, float(n * n), n=n)
        co = mode_coefficients(params, sp, ModeData(0.4, -0.8, 0.3, 0.1))
        atoms = [(complex(sp.r), co.R), (1j * sp.omega, co.C),
                 (-1j * np.conj(sp.omega), np.conj(co.C)),
                 (1j * sp.zeta, co.D), (-1j * np.conj(sp.zeta), np.conj(co.D))]
        t = np.linspace(0.0, 3.0, 301)
        f2_built = np.zeros_like(t, dtype=complex)
        decay_total = 0j
        for z, amp in atoms:
            same, decay = upsilon_apply_exponential(params, sp.lam, z)
            f2_built += amp * same * np.exp(z * t)
            decay_total += amp * decay
        assert abs(decay_total) < 1e-12
        _, f2 = mode_series_eval(sp, co, t)
        assert np.max(np.abs(f2_built.real - f2)) < 1e-8
        assert np.max(np.abs(f2_built.imag)) < 1e-8


class TestOdeOracle:
    def test_zero_data(self, params):
        t = np.linspace(0.0, 1.0, 11)
        f1, f2 = mode_ode_oracle(params, 4.0, ModeData(0, 0, 0, 0), t)
        assert np.all(f1.values == 0) and np.all(f2.values == 0)

    def test_decoupled_second_component_stays_zero(self):
        p = Parameters(0.3, 1.0, 0.1, 0.0)
        t = np.linspace(0.0, 2.0, 41)
        _, f2 = mode_ode_oracle(p, 9.0, ModeData(1.0, 0.5, 0.0, 0.0), t)
        assert np.all(f2.values == 0)

    def test_step_size_violation(self, params):
        t = np.linspace(0.0, 1.0, 3)
        with pytest.raises(ValueError, match="step"):
            mode_ode_oracle(params, 1e4, ModeData(1, 0, 0, 0), t, dt=0.5)

    def test_explicit_dt_must_divide_grid(self, params):
        t = np.linspace(0.0, 1.0, 11)
        with pytest.raises(ValueError, match="divide"):
            mode_ode_oracle(params, 4.0, ModeData(1, 0, 0, 0), t, dt=0.03)

    def test_series_agreement_two_pi(self, params, rng):
        t = np.linspace(0.0, 2 * np.pi, 257)
        for n in (1, 3, 8):
            err = series_sup_error(params, n, ModeData(*rng.standard_normal(4)), t)
            assert err < 1e-6, f"n={n}: {err:.2e}"


class TestSeriesEval:
    def test_time_zero_reproduces_data(self, params, rng):
        for n in (1, 5, 12):
            sp = solve_quintic(params, float(n * n), n=n)
            d = ModeData(*rng.standard_normal(4))
            co = mode_coefficients(params, sp, d)
            f1, f2 = mode_series_eval(sp, co, 0.0)
            assert f1 == pytest.approx(d.alpha1, abs=1e-12 * (1 + abs(d.alpha1)))
            assert f2 == pytest.approx(d.alpha2, abs=1e-12 * (1 + abs(d.alpha2)))

    def test_outputs_are_real_arrays(self, params):
        sp = solve_quintic(params, 9.0, n=3)
        co = mode_coefficients(params, sp, ModeData(1, 1, 1, 1))
        f1, f2 = mode_series_eval(sp, co, np.linspace(0, 1, 5))
        assert f1.dtype == float and f2.dtype == float


class TestNormEquivalences:
    """Frozen-constant regressions for the coefficient/data norm comparisons."""

    @staticmethod
    def _data_norms(sp, d):
        return (d.alpha1 ** 2 * sp.lam + d.rho1 ** 2,
                d.alpha2 ** 2 * sp.lam + d.rho2 ** 2)

    def test_oscillatory_vs_data_weighted(self, params, rng):
        # lam (|C|^2 + lam |D|^2) / (n1 + (a/beta)^2 n2) -> 1/4; bracket [1/8, 2]
        w = (params.a / params.beta) ** 2
        spectra = string_spectrum(params, 32)
        for _ in range(50):
            n = int(rng.integers(16, 33))
            sp = spectra[n - 1]
            d = ModeData(*rng.standard_normal(4))
            co = mode_coefficients(params, sp, d)
            n1, n2 = self._data_norms(sp, d)
            ratio = (abs(co.C) ** 2 + sp.lam * abs(co.D) ** 2) * sp.lam / (n1 + w * n2)
            assert 0.125 <= ratio <= 2.0

    def test_oscillatory_vs_data_plain(self, params, rng):
        # same ratio without the coupling weight; wider regression band
        spectra = string_spectrum(params, 32)
        for _ in range(50):
            n = int(rng.integers(16, 33))
            sp = spectra[n - 1]
            d = ModeData(*rng.standard_normal(4))
            co = mode_coefficients(params, sp, d)
            n1, n2 = self._data_norms(sp, d)
            ratio = (abs(co.C) ** 2 + sp.lam * abs(co.D) ** 2) * sp.lam / (n1 + n2)
            assert 0.02 <= ratio <= 0.30

    def test_real_part_decay(self, params, rng):
        # |R| sqrt(lam) / (|C|^2 + lam |D|^2)^{1/2} bounded; frozen at 1.5
        for n in range(1, 65):
            sp = solve_quintic(params, float(n * n), n=n)
            d = ModeData(*rng.standard_normal(4))
            co = mode_coefficients(params, sp, d)
            bound = np.sqrt(abs(co.C) ** 2 + sp.lam * abs(co.D) ** 2)
            assert abs(co.R) * np.sqrt(sp.lam) <= 1.5 * bound

    def test_real_part_against_multiplier_norm(self, params, rng):
        # plain version: |R| <= (|C|^2 + |d D|^2)^{1/2}
        for n in range(1, 65):
            sp = solve_quintic(params, float(n * n), n=n)
            d = ModeData(*rng.standard_normal(4))
            co = mode_coefficients(params, sp, d)
            bound = np.sqrt(abs(co.C) ** 2 + abs(co.d * co.D) ** 2)
            assert abs(co.R) <= 1.0 * bound

    def test_energy_equivalence(self, params, rng):
        # sum lam (|C|^2 + |dD|^2) brackets the data energy; frozen [1/8, 1/2]
        spectra = string_spectrum(params, 24)
        for _ in range(10):
            data = random_mode_data(rng, 24)
            coeff_energy = 0.0
            data_energy = 0.0
            for sp, d in zip(spectra, data):
                co = mode_coefficients(params, sp, d)
                coeff_energy += sp.lam * (abs(co.C) ** 2 + abs(co.d * co.D) ** 2)
                n1, n2 = self._data_norms(sp, d)
                data_energy += n1 + n2
            assert 0.125 <= coeff_energy / data_energy <= 0.5
