"""Window transforms and empirical observability (frame-ratio) experiments.

The windowed-norm machinery expands integrals of the form

    int k(t) |sum_j 2 Re(F_j e^{i sigma_j t})|^2 dt

into finite double sums over the closed-form transforms

    K(w)  = T pi / (pi^2 - T^2 w^2),        k(t)  = sin(pi t / T) on [0, T],
    K*(u) = 4 T pi / (pi^2 - 4 T^2 u^2),    k*(t) = cos(pi t / 2T) on [-T, T],

using int_0^T k e^{iwt} dt = (1 + e^{iwT}) K(w) and
int_{-T}^T k* e^{iut} dt = cos(uT) K*(u).

The frame experiments draw random finite-mode data, build the scalar signal
pair

    u1(t) = sum_n C~_n e^{i w_n t} + cc + R~_n e^{r_n t} + D~_n e^{i z_n t} + cc
    u2(t) = sum_n d_n D~_n e^{i z_n t} + cc + c_n C~_n e^{i w_n t} + cc + E e^{-eta t}

from the boundary-trace amplitudes (X~_n = (-1)^n n X_n,
E = sum (-1)^n n E_n), and measure the ratio of int_0^T (|u1|^2 + |u2|^2) dt
against sum_n (|C~_n|^2 + |d_n D~_n|^2).  Above the threshold time
2 pi / sqrt(gamma^2 - 16 alpha^2) the ratio admits a positive lower bound;
the adversarial construction exhibits its collapse below threshold.  The
decay term is part of the signal but never of the denominator.  The direct
(upper) inequality uses the same signals without the decay term, integrated
over [-T, T].
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.integrate import simpson

from memwave.core import Parameters
from memwave.modes import solve_vandermonde, initial_derivatives, ModeData
from memwave.series import (ModeSet, build_mode_set, eval_exponential_sum,
                            random_mode_data)
from memwave.spectrum import sequence_constants, string_spectrum

log = logging.getLogger(__name__)

TRACE_SAMPLES = 4097  # default time resolution: dt = T/4096


@dataclass(frozen=True)
class InghamReport:
    T: float
    gamma: float
    alpha: float
    threshold_gamma4alpha: float
    threshold_gammaonly: float
    lower_ratio: float
    upper_ratio: float
    trials: int
    seed: int

    def __post_init__(self):
        if self.lower_ratio > self.upper_ratio:
            raise ValueError("lower_ratio must not exceed upper_ratio")


# -- windows and transforms --------------------------------------------------

def k_window(T: float, t):
    """sin(pi t / T) on [0, T], zero elsewhere."""
    if not T > 0:
        raise ValueError("T must be positive")
    t = np.asarray(t, dtype=float)
    return np.where((t >= 0) & (t <= T), np.sin(np.pi * t / T), 0.0)


def kstar_window(T: float, t):
    """cos(pi t / 2T) on [-T, T], zero elsewhere."""
    if not T > 0:
        raise ValueError("T must be positive")
    t = np.asarray(t, dtype=float)
    return np.where(np.abs(t) <= T, np.cos(np.pi * t / (2 * T)), 0.0)


def K_transform(T: float, w):
    """K(w) = T pi / (pi^2 - T^2 w^2)."""
    w = np.asarray(w, dtype=complex)
    den = np.pi ** 2 - T ** 2 * w ** 2
    if np.any(np.abs(den) <= 1e-12):
        raise ZeroDivisionError(f"K pole at |w| = pi/T = {np.pi / T}")
    return T * np.pi / den


def Kstar_transform(T: float, u):
    """K*(u) = 4 T pi / (pi^2 - 4 T^2 u^2)."""
    u = np.asarray(u, dtype=complex)
    den = np.pi ** 2 - 4 * T ** 2 * u ** 2
    if np.any(np.abs(den) <= 1e-12):
        raise ZeroDivisionError(f"K* pole at |u| = pi/2T = {np.pi / (2 * T)}")
    return 4 * T * np.pi / den


def sine_transform_factor(T: float, w):
    """int_0^T k(t) e^{iwt} dt = (1 + e^{iwT}) K(w)."""
    w = np.asarray(w, dtype=complex)
    return (1.0 + np.exp(1j * w * T)) * K_transform(T, w)


def cosine_transform_factor(T: float, u):
    """int_{-T}^T k*(t) e^{iut} dt = cos(uT) K*(u)."""
    u = np.asarray(u, dtype=complex)
    return np.cos(u * T) * Kstar_transform(T, u)


def _bilinear_window_sum(sigmas, F, factor, pole_den):
    s = np.asarray(sigmas, dtype=complex)
    F = np.asarray(F, dtype=complex)
    w_plus = s[:, None] + s[None, :]
    w_minus = s[:, None] - np.conj(s)[None, :]
    for args in (w_plus, w_minus):
        bad = np.abs(pole_den(args)) <= 1e-12
        if np.any(bad):
            j, l = np.argwhere(bad)[0]
            raise ZeroDivisionError(
                f"window transform pole for sigma pair ({j}, {l}): "
                f"sigma_j={s[j]}, sigma_l={s[l]}")
    p_plus = F[:, None] * F[None, :]
    p_minus = F[:, None] * np.conj(F)[None, :]
    total = np.sum(p_plus * factor(w_plus) + p_minus * factor(w_minus))
    return 2.0 * float(total.real)


def windowed_norm_closed_form(sigmas, F, T: float) -> float:
    """int_0^T k(t) |sum 2 Re(F e^{i sigma t})|^2 dt via the K double sum."""
    return _bilinear_window_sum(sigmas, F,
                                lambda w: sine_transform_factor(T, w),
                                lambda w: np.pi ** 2 - T ** 2 * w ** 2)


def kstar_windowed_norm_closed_form(sigmas, F, T: float) -> float:
    """int_{-T}^T k*(t) |sum 2 Re(F e^{i sigma t})|^2 dt via the K* double sum."""
    return _bilinear_window_sum(sigmas, F,
                                lambda u: cosine_transform_factor(T, u),
                                lambda u: np.pi ** 2 - 4 * T ** 2 * u ** 2)


# -- abstract signal assembly -------------------------------------------------

def abstract_signal_atoms(ms: ModeSet, include_decay: bool = True,
                          include_real_part: bool = True):
    """(sigmas, amps1, amps2, denominator) for the frame-experiment signal model.

    amps follow the 2 Re(F e^{i sigma t}) convention; trace weights
    (-1)^n n are applied to every mode amplitude.  The u2 signal uses the
    asymptotic multipliers (c, d) and, when include_decay, the consolidated
    e^{-eta t} term with amplitude E = sum (-1)^n n E_n.  The denominator
    sum(|C~|^2 + |d D~|^2) never includes the decay term.
    """
    sigmas, a1, a2 = [], [], []
    denom = 0.0
    cal_e = 0.0
    for sp, co in zip(ms.spectra, ms.coeffs):
        wgt = (-1.0) ** sp.n * sp.n
        Ct, Dt, Rt = wgt * co.C, wgt * co.D, wgt * co.R
        sigmas += [sp.omega, sp.zeta]
        a1 += [Ct, Dt]
        a2 += [co.c * Ct, co.d * Dt]
        if include_real_part:
            sigmas.append(-1j * sp.r)
            a1.append(0.5 * Rt)
            a2.append(0.0)
        denom += abs(Ct) ** 2 + abs(co.d * Dt) ** 2
        cal_e += wgt * co.E
    if include_decay:
        sigmas.append(1j * ms.params.eta)
        a1.append(0.0)
        a2.append(0.5 * cal_e)
    return (np.array(sigmas, dtype=complex), np.array(a1, dtype=complex),
            np.array(a2, dtype=complex), float(denom))


def _signal_ratio(ms: ModeSet, T: float, num_samples: int = TRACE_SAMPLES,
                  t0: float = 0.0, include_decay: bool = True) -> float | None:
    sigmas, a1, a2, denom = abstract_signal_atoms(ms, include_decay=include_decay)
    if denom <= 0.0:
        return None
    t = np.linspace(t0, T, num_samples)
    u1 = eval_exponential_sum(sigmas, a1, t)
    u2 = eval_exponential_sum(sigmas, a2, t)
    num = float(simpson(u1 * u1 + u2 * u2, dx=t[1] - t[0]))
    return num / denom


def standard_data_builder(N: int, data_filter=None, decay: float = 1.0):
    """Builder drawing 1/n**decay-scaled normal data; data_filter may zero
    fields.  Pass decay=2 when comparing runs across truncation levels:
    with decay=1 the trace sums grow with N and no level-to-level limit
    exists."""
    def build(params: Parameters, rng: np.random.Generator) -> ModeSet:
        data = random_mode_data(rng, N, decay=decay)
        if data_filter is not None:
            data = [data_filter(d) for d in data]
        return build_mode_set(params, data)
    return build


def frame_ratio_experiment(params: Parameters, ms_builder, T: float,
                           trials: int, seed: int,
                           num_samples: int = TRACE_SAMPLES):
    """Empirical two-sided frame ratios over random trials.

    Returns (InghamReport, ratios).  Ratios are min/max over trials of
    int_0^T (|u1|^2+|u2|^2) dt / sum(|C~|^2 + |d D~|^2); empirical bounds,
    not certified infima.  Trials with all-zero data are skipped and logged.
    """
    if not (T > 0 and trials >= 1):
        raise ValueError("need T > 0 and trials >= 1")
    ratios = []
    n_ref = 16
    for trial in range(trials):
        rng = np.random.default_rng((seed, trial))
        ms = ms_builder(params, rng)
        n_ref = max(n_ref, ms.N)
        ratio = _signal_ratio(ms, T, num_samples)
        if ratio is None:
            log.warning("trial %d skipped: zero data", trial)
            continue
        ratios.append(ratio)
    if not ratios:
        raise ValueError("all trials degenerate")
    sc = sequence_constants(string_spectrum(params, n_ref))
    rad = sc.gamma ** 2 - 16.0 * sc.alpha ** 2
    report = InghamReport(
        T=T, gamma=sc.gamma, alpha=sc.alpha,
        threshold_gamma4alpha=2 * np.pi / np.sqrt(rad) if rad > 0 else np.inf,
        threshold_gammaonly=2 * np.pi / sc.gamma,
        lower_ratio=float(np.min(ratios)), upper_ratio=float(np.max(ratios)),
        trials=len(ratios), seed=seed)
    return report, np.array(ratios)


def coefficient_condition_check(ms: ModeSet, M: float) -> bool:
    """True iff |C_n| <= M |d_n D_n| for every retained mode."""
    return all(abs(co.C) <= M * abs(co.d * co.D) for co in ms.coeffs)


def lower_bound_constant(T: float, eps: float, gamma: float, alpha: float) -> float:
    """Analytic observability constant; positive iff the time condition holds."""
    eps_max = (gamma ** 2 - 16 * alpha ** 2) / (gamma ** 2 + 16 * alpha ** 2)
    if not 0 < eps < eps_max:
        raise ValueError(f"eps must lie in (0, {eps_max}); got {eps}")
    return np.pi * T * (1 - eps) * (
        1.0 / (np.pi ** 2 + 4 * T ** 2 * alpha ** 2 * (1 + eps))
        - 4.0 / (T ** 2 * gamma ** 2 * (1 - eps)))


def telescoping_tail_sum(n: int, n0: int, upto: int) -> float:
    """sum_{m = n0..upto, m != n} 1/(4(m-n)^2 - 1); always <= 1."""
    m = np.arange(n0, upto + 1)
    m = m[m != n]
    return float(np.sum(1.0 / (4.0 * (m - n) ** 2 - 1.0)))


def gap_utilities(sigmas, eps: float, r_constants=None) -> int:
    """Smallest 1-based index n0 from which the scaled gap conditions hold.

    Conditions, with gamma estimated as the minimal consecutive gap over the
    second half of the sequence and s = gamma sqrt(1-eps):
      |Re sigma_n - Re sigma_m| >= s |n - m|  for all n, m >= n0, and
      Re sigma_n >= s n                        for all n >= n0.
    When r_constants = (a, b, nu) is given, n0 is additionally pushed up
    until a/(4 n0^2 - 1) + b/(2(2 n0 - 1)) <= eps and
    a sum_{m>=n0} m^{-2 nu} <= eps.
    """
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    re = np.asarray(sigmas, dtype=complex).real
    n = re.size
    if n < 8:
        raise ValueError("sequence too short to estimate the gap")
    if np.any(np.diff(re) <= 0):
        raise ValueError("Re sigma must be strictly increasing")
    gamma = float(np.min(np.diff(re[n // 2 - 1:])))
    s = gamma * np.sqrt(1.0 - eps)
    idx = np.arange(1, n + 1, dtype=float)

    def gap_ok(n0):
        i = n0 - 1
        sub = re[i:]
        sub_idx = idx[i:]
        if np.any(sub < s * sub_idx):
            return False
        diffs = np.abs(sub[:, None] - sub[None, :])
        steps = np.abs(sub_idx[:, None] - sub_idx[None, :])
        return bool(np.all(diffs >= s * steps - 1e-12))

    n0 = next((k for k in range(1, n + 1) if gap_ok(k)), None)
    if n0 is None:
        raise ValueError("no admissible n0 within the computed sequence")
    if r_constants is not None:
        a_c, b_c, nu = r_constants
        from scipy.special import zeta
        def tails_ok(k):
            tail1 = a_c / (4.0 * k * k - 1.0) + b_c * 0.5 / (2.0 * k - 1.0)
            tail2 = a_c * (zeta(2 * nu) - np.sum(idx[: k - 1] ** (-2 * nu)))
            return tail1 <= eps and tail2 <= eps
        while n0 <= n and not tails_ok(n0):
            n0 += 1
        if n0 > n:
            raise ValueError("tail-sum conditions unreachable within the sequence")
    return n0


def direct_inequality_experiment(params: Parameters, ms_builder, T: float,
                                 trials: int, seed: int,
                                 num_samples: int = 2 * TRACE_SAMPLES - 1):
    """Empirical direct-inequality constant c(T) over [-T, T].

    The direct-side signals drop the e^{-eta t} term (it is not part of the
    upper-bound model); u1 keeps its real-exponential part.
    """
    ratios = []
    for trial in range(trials):
        rng = np.random.default_rng((seed, trial))
        ms = ms_builder(params, rng)
        ratio = _signal_ratio(ms, T, num_samples, t0=-T, include_decay=False)
        if ratio is None:
            log.warning("trial %d skipped: zero data", trial)
            continue
        ratios.append(ratio)
    if not ratios:
        raise ValueError("all trials degenerate")
    return {"T": T, "trials": len(ratios), "seed": seed,
            "c_T": float(np.max(ratios)), "ratios": ratios}


# -- adversarial construction -------------------------------------------------

# Amplitude coordinate layout for a mode pair (trace weights already applied):
# x = (Re C1, Im C1, Re D1, Im D1, Re C2, Im C2, Re D2, Im D2, R1, R2, E).
_OSC = np.arange(8)
_FREE = np.arange(8, 11)


def _pair_amplitude_forms(params: Parameters, pair, T: float,
                          num_samples: int):
    """(Q, Pdiag): numerator and denominator quadratic forms over the pair.

    Q is the Simpson form of int_0^T (|u1|^2 + |u2|^2) dt in the 11 real
    amplitude coordinates; the denominator is diagonal and blind to the
    (R1, R2, E) block.
    """
    t = np.linspace(0.0, T, num_samples)
    w_simp = np.ones(num_samples)
    w_simp[1:-1:2] = 4.0
    w_simp[2:-1:2] = 2.0
    w_simp *= (t[1] - t[0]) / 3.0
    sigmas = np.array([pair[0].omega, pair[0].zeta, -1j * pair[0].r,
                       pair[1].omega, pair[1].zeta, -1j * pair[1].r,
                       1j * params.eta])
    from memwave.modes import multipliers
    c1, d1 = multipliers(params, pair[0])
    c2, d2 = multipliers(params, pair[1])
    ex = np.exp(1j * np.outer(sigmas, t))

    def col(a1, a2):
        return (2 * np.real(a1 @ ex), 2 * np.real(a2 @ ex))

    z7 = np.zeros(7, dtype=complex)
    B1 = np.empty((11, num_samples))
    B2 = np.empty((11, num_samples))
    units = []
    for atom, mult in [(0, c1), (1, d1), (3, c2), (4, d2)]:
        for part in (1.0, 1j):
            a1 = z7.copy(); a2 = z7.copy()
            a1[atom] = part
            a2[atom] = mult * part
            units.append((a1, a2))
    for k, (a1, a2) in enumerate(units):
        B1[k], B2[k] = col(a1, a2)
    for k, atom in [(8, 2), (9, 5)]:
        a1 = z7.copy(); a1[atom] = 0.5
        B1[k], B2[k] = col(a1, z7)
    a2 = z7.copy(); a2[6] = 0.5
    B1[10], B2[10] = col(z7, a2)
    Q = (B1 * w_simp) @ B1.T + (B2 * w_simp) @ B2.T
    pdiag = np.array([1.0, 1.0, abs(d1) ** 2, abs(d1) ** 2,
                      1.0, 1.0, abs(d2) ** 2, abs(d2) ** 2,
                      0.0, 0.0, 0.0])
    return 0.5 * (Q + Q.T), pdiag


def _minimize_pair_ratio(Q, pdiag):
    """Minimize x'Qx / x'Px over the 11 amplitude coordinates.

    P vanishes on the (R1, R2, E) block, so that block is eliminated by a
    Schur complement (for fixed oscillatory amplitudes the numerator is
    minimized over the free block) before the dense generalized eigensolve.
    """
    Qyy = Q[np.ix_(_OSC, _OSC)]
    Qyz = Q[np.ix_(_OSC, _FREE)]
    Qzz = Q[np.ix_(_FREE, _FREE)]
    S = Qyy - Qyz @ np.linalg.solve(Qzz, Qyz.T)
    vals, vecs = scipy.linalg.eigh(0.5 * (S + S.T), np.diag(pdiag[_OSC]))
    y = vecs[:, 0]
    z = -np.linalg.solve(Qzz, Qyz.T @ y)
    x = np.concatenate([y, z])
    return float(vals[0]), x


def adversarial_two_mode_data(params: Parameters, N: int, T: float,
                              reference_T: float | None = None,
                              num_samples: int = TRACE_SAMPLES):
    """Worst-case signal amplitudes supported on two adjacent modes.

    For each pair (n, n+1) the signal-energy form over the 11-dim amplitude
    space (oscillatory amplitudes plus the real-exponential and decay
    coefficients, which the denominator does not see) is minimized against
    the denominator form; the best pair wins.  The optimum is beat-frequency
    shaped: the two nearly parallel real exponentials carry large opposite
    amplitudes that cancel the oscillatory residue over [0, T] but
    decorrelate over longer windows.

    Returns (ms, info): a synthetic two-mode ModeSet whose coefficients
    encode the minimizer (its data fields are zero placeholders, since the
    amplitudes do not come from initial data), and a dict with the chosen
    pair, the attained ratio, and the same-amplitude ratio at reference_T
    when given.
    """
    if N < 2:
        raise ValueError("need at least two modes")
    spectra = string_spectrum(params, N)
    best = None
    for i in range(N - 1):
        pair = (spectra[i], spectra[i + 1])
        Q, pdiag = _pair_amplitude_forms(params, pair, T, num_samples)
        val, x = _minimize_pair_ratio(Q, pdiag)
        if best is None or val < best[0]:
            best = (val, i, x, pdiag)
    ratio, i, x, pdiag = best
    x = x / np.max(np.abs(x))
    pair = (spectra[i], spectra[i + 1])

    from memwave.modes import ModeCoefficients, multipliers, upsilon_apply_exponential
    coeffs = []
    for k, sp in enumerate(pair):
        wgt = (-1.0) ** sp.n * sp.n
        C = (x[4 * k] + 1j * x[4 * k + 1]) / wgt
        D = (x[4 * k + 2] + 1j * x[4 * k + 3]) / wgt
        R = x[8 + k] / wgt
        E = x[10] / wgt if k == 0 else 0.0
        c, d = multipliers(params, sp)
        m_r = upsilon_apply_exponential(params, sp.lam, complex(sp.r))[0]
        m_omega = upsilon_apply_exponential(params, sp.lam, 1j * sp.omega)[0]
        coeffs.append(ModeCoefficients(
            R=float(R), C=C, D=D, c=c, d=d, E=float(E),
            m_r=float(m_r.real), m_omega=m_omega, cond=float("nan")))
    ms = ModeSet(params=params, N=2, spectra=list(pair),
                 data=[ModeData(0.0, 0.0, 0.0, 0.0)] * 2, coeffs=coeffs)
    info = {"pair": (pair[0].n, pair[1].n), "ratio": ratio, "T": T}
    if reference_T is not None:
        info["reference_T"] = reference_T
        info["reference_ratio"] = _signal_ratio(ms, reference_T, num_samples)
    return ms, info
