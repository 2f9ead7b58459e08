"""Acceptance battery: eight structural checks at fixed tolerances.

Each check exercises one headline property of the toolkit end to end and
returns a CheckResult; run_all collects the battery in order.  The checks
fix their own seeds and scales so a passing battery is reproducible
regardless of experiment configuration; only the physical parameters are
taken from the caller.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from memwave.core import Parameters
from memwave.fd import FDGrid, simulate_homogeneous
from memwave.hum import TargetState, gram_matrix, solve_controls, verify_control
from memwave.ingham import (Kstar_transform, K_transform,
                            adversarial_two_mode_data,
                            coefficient_condition_check,
                            direct_inequality_experiment,
                            frame_ratio_experiment, k_window,
                            kstar_window, sine_transform_factor,
                            standard_data_builder)
from memwave.modes import (ModeData, initial_derivatives, mode_coefficients,
                           mode_ode_oracle_batch, mode_series_eval)
from memwave.series import build_mode_set, eval_solution
from memwave.spectrum import (quintic_residuals, sequence_constants,
                              string_spectrum)

DEFAULT_PARAMS = Parameters(beta=0.3, eta=1.0, a=0.1, b=0.1)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float


def _finish(name: str, t0: float, ok: bool, detail: str) -> CheckResult:
    return CheckResult(name=name, passed=bool(ok), detail=detail,
                       seconds=time.perf_counter() - t0)


def check_spectral_fidelity(params: Parameters = DEFAULT_PARAMS) -> CheckResult:
    """Modes 1..64: root residuals, the trace identity, and asymptotics."""
    t0 = time.perf_counter()
    spectra = string_spectrum(params, 64)
    worst_resid = 0.0
    worst_vieta = 0.0
    worst_rgap = 0.0
    for ms in spectra:
        worst_resid = max(worst_resid,
                          np.max(quintic_residuals(params, ms)) / (1 + ms.lam ** 3))
        root_sum = ms.r - 2 * ms.omega.imag - 2 * ms.zeta.imag
        worst_vieta = max(worst_vieta, abs(root_sum + params.eta))
        worst_rgap = max(worst_rgap,
                         abs(ms.r - (params.beta - params.eta)) * ms.lam)
    im_gap = abs(spectra[-1].omega.imag - params.beta / 2)
    ok = (worst_resid < 1e-10 and worst_vieta < 1e-9
          and worst_rgap < 1.0 and im_gap < 1e-2)
    return _finish(
        "spectral-fidelity", t0, ok,
        f"resid={worst_resid:.3g} vieta={worst_vieta:.3g} "
        f"rgap={worst_rgap:.3g} im_omega_gap={im_gap:.3g}")


def check_coefficient_fidelity(params: Parameters = DEFAULT_PARAMS) -> CheckResult:
    """Reconstructed mode trajectories vs the RK4 oracle, 50 draws, n=1..8."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    rows = rng.standard_normal((50, 4))
    t = np.linspace(0.0, 2.0 * np.pi, 257)
    spectra = string_spectrum(params, 8)
    sup_err = 0.0
    ident_err = 0.0
    for sp in spectra:
        o1, o2 = mode_ode_oracle_batch(params, sp.lam, rows, t)
        for j in range(rows.shape[0]):
            data = ModeData(*rows[j])
            co = mode_coefficients(params, sp, data)
            f1, f2 = mode_series_eval(sp, co, t)
            sup_err = max(sup_err,
                          np.max(np.abs(f1 - o1[:, j])),
                          np.max(np.abs(f2 - o2[:, j])))
            f = initial_derivatives(params, sp.lam, data)
            want = (-2 * sp.lam * f[2] + sp.lam * params.beta * f[1]
                    + (params.a * params.b - params.eta * sp.lam * params.beta
                       - sp.lam ** 2) * f[0])
            ident_err = max(ident_err, abs(f[4] - want) / max(1.0, abs(want)))
    ok = sup_err < 1e-6 and ident_err < 1e-12
    return _finish("coefficient-fidelity", t0, ok,
                   f"sup_err={sup_err:.3g} identity_err={ident_err:.3g}")


def check_window_identities(params: Parameters = DEFAULT_PARAMS) -> CheckResult:
    """Window transforms vs quadrature and the even-window doubling rule."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    T = 3.0
    worst_quad = 0.0
    worst_alg = 0.0

    def quad_complex(f, lo, hi):
        re = quad(lambda s: f(s).real, lo, hi, limit=400)[0]
        im = quad(lambda s: f(s).imag, lo, hi, limit=400)[0]
        return complex(re, im)

    for _ in range(100):
        w = complex(rng.uniform(-6, 6), rng.uniform(-1, 1))
        got = complex(sine_transform_factor(T, w))
        want = quad_complex(lambda s: k_window(T, s) * np.exp(1j * w * s), 0, T)
        worst_quad = max(worst_quad, abs(got - want))
        worst_alg = max(worst_alg,
                        abs(Kstar_transform(T, w) - 2.0 * K_transform(2 * T, w)))
    ok = worst_quad < 1e-8 and worst_alg < 1e-8
    return _finish("window-identities", t0, ok,
                   f"quad_err={worst_quad:.3g} doubling_err={worst_alg:.3g}")


def check_observability(params: Parameters = DEFAULT_PARAMS) -> CheckResult:
    """Frame bounds above the threshold time; adversarial collapse below."""
    t0 = time.perf_counter()
    report, _ = frame_ratio_experiment(params, standard_data_builder(24),
                                       T=8.0, trials=50, seed=7)
    _, info = adversarial_two_mode_data(params, 24, 2.0, reference_T=8.0)
    ok = (report.lower_ratio > 0
          and report.lower_ratio / report.upper_ratio > 1e-4
          and info["ratio"] < 1e-3 * info["reference_ratio"])
    return _finish(
        "observability", t0, ok,
        f"lower={report.lower_ratio:.4g} upper={report.upper_ratio:.4g} "
        f"threshold={report.threshold_gamma4alpha:.4g} "
        f"adversarial={info['ratio']:.3g} reference={info['reference_ratio']:.3g}")


def check_alternative_regime(params: Parameters = DEFAULT_PARAMS) -> CheckResult:
    """Second-component data pass the coefficient condition and keep a
    positive lower frame bound below the two-constant threshold time."""
    t0 = time.perf_counter()

    def u2_only(d: ModeData) -> ModeData:
        return ModeData(0.0, 0.0, d.alpha2, d.rho2)

    builder = standard_data_builder(24, data_filter=u2_only)
    condition_ok = all(
        coefficient_condition_check(
            builder(params, np.random.default_rng((11, s))), 1.0)
        for s in range(10))
    sc = sequence_constants(string_spectrum(params, 24))
    T = 1.05 * 2.0 * np.pi / sc.gamma
    report, _ = frame_ratio_experiment(params, builder, T=T, trials=20, seed=11)
    ok = (condition_ok and report.lower_ratio > 0
          and report.threshold_gammaonly < T < report.threshold_gamma4alpha)
    return _finish(
        "alternative-regime", t0, ok,
        f"condition_ok={condition_ok} T={T:.4g} lower={report.lower_ratio:.4g}")


def check_direct_inequality(params: Parameters = DEFAULT_PARAMS) -> CheckResult:
    """Empirical upper constant finite and stable when truncation doubles."""
    t0 = time.perf_counter()
    d16 = direct_inequality_experiment(
        params, standard_data_builder(16, decay=2.0), 8.0, 20, 5)
    d32 = direct_inequality_experiment(
        params, standard_data_builder(32, decay=2.0), 8.0, 20, 5)
    ratio = d32["c_T"] / d16["c_T"]
    ok = np.isfinite(d16["c_T"]) and np.isfinite(d32["c_T"]) \
        and 0.8 <= ratio <= 1.25
    return _finish(
        "direct-inequality", t0, ok,
        f"c16={d16['c_T']:.6g} c32={d32['c_T']:.6g} ratio={ratio:.4g}")


def check_control_loop(params: Parameters = DEFAULT_PARAMS) -> CheckResult:
    """Flagship steering run: conditioning, closed-loop errors, and the
    below-threshold conditioning blowup."""
    t0 = time.perf_counter()
    N, T, nx = 12, 8.0, 800
    target = TargetState.single_mode(N, 1, "alpha1")
    controls, gram = solve_controls(params, target, T)
    rep = verify_control(params, controls, target, T, FDGrid.for_horizon(nx, T))
    G4, _, _ = gram_matrix(params, N, 4.0)
    cond4 = float(np.linalg.cond(G4))
    ok = (gram.condition_estimate < 1e8
          and rep["err_u1"] <= 0.05 and rep["err_u2"] <= 0.05
          and rep["err_v1"] <= 0.05 and rep["err_v2"] <= 0.05
          and cond4 >= 100 * gram.condition_estimate)
    return _finish(
        "control-loop", t0, ok,
        f"cond={gram.condition_estimate:.4g} cond_T4={cond4:.4g} "
        f"err_u1={rep['err_u1']:.4g} err_u2={rep['err_u2']:.4g} "
        f"err_v1={rep['err_v1']:.4g} err_v2={rep['err_v2']:.4g}")


def check_oracle_cross_validation(params: Parameters = DEFAULT_PARAMS) -> CheckResult:
    """Spectral vs finite-difference solutions, plus the FD refinement order."""
    t0 = time.perf_counter()
    data = [ModeData(0, 0, 0, 0), ModeData(0.8, -0.4, 0.3, 0.6)]
    ms = build_mode_set(params, data)

    grid = FDGrid.for_horizon(800, 3.0)
    hist = simulate_homogeneous(params, data, grid)
    rows = np.linspace(0, grid.nt, 61).round().astype(int)
    err = ref = 0.0
    for k in rows:
        u1, u2 = eval_solution(ms, grid.t[k], grid.x)
        err += np.sum((hist.u1[k] - u1) ** 2) + np.sum((hist.u2[k] - u2) ** 2)
        ref += np.sum(u1 ** 2) + np.sum(u2 ** 2)
    rel = float(np.sqrt(err / ref))

    errs = []
    for nx in (100, 200, 400):
        g = FDGrid.for_horizon(nx, 2.0)
        h = simulate_homogeneous(params, data, g)
        u1, _ = eval_solution(ms, g.T, g.x)
        errs.append(np.sqrt(np.trapezoid((h.u1[-1] - u1) ** 2, g.x)))
    orders = np.log2(np.array(errs[:-1]) / errs[1:])
    ok = rel <= 0.01 and np.all(orders > 1.7) and np.all(orders < 2.3)
    return _finish(
        "oracle-cross-validation", t0, ok,
        f"rel_l2={rel:.4g} orders={orders[0]:.3f},{orders[1]:.3f}")


ALL_CHECKS = (
    check_spectral_fidelity,
    check_coefficient_fidelity,
    check_window_identities,
    check_observability,
    check_alternative_regime,
    check_direct_inequality,
    check_control_loop,
    check_oracle_cross_validation,
)


def run_all(params: Parameters = DEFAULT_PARAMS) -> list[CheckResult]:
    return [check(params) for check in ALL_CHECKS]
