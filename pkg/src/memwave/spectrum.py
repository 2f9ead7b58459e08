"""Characteristic roots of the memory-coupled mode equations.

For each eigenvalue lam of the string Laplacian the coupled mode pair reduces
to a fifth-order ODE whose characteristic polynomial is

    P(Z) = Z^5 + eta Z^4 + 2 lam Z^3 + lam (2 eta - beta) Z^2
           + (lam^2 - a b) Z + lam^2 (eta - beta) - eta a b.

Its root set consists of one real root r < 0 and two conjugate pairs, written
{i w, -i conj(w)} and {i z, -i conj(z)} with Re w, Re z > 0.  The w family
carries the memory damping (Im w -> beta/2); the z family is the weakly
damped one created by the coupling (Im z -> 0).  Roots are computed as
companion-matrix eigenvalues and classified against asymptotic seeds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from memwave.core import Parameters


class ClassificationError(RuntimeError):
    """Root pattern does not match one real root plus two conjugate pairs."""


@dataclass(frozen=True)
class ModeSpectrum:
    n: int
    lam: float
    r: float
    omega: complex
    zeta: complex

    def roots(self) -> np.ndarray:
        """The five characteristic roots in the Z plane."""
        return np.array([
            self.r,
            1j * self.omega,
            -1j * np.conj(self.omega),
            1j * self.zeta,
            -1j * np.conj(self.zeta),
        ])


@dataclass(frozen=True)
class SequenceConstants:
    gamma: float
    alpha: float
    chi: float

    def __post_init__(self):
        if not (self.gamma > 0 and self.alpha > 0 and self.chi < 0):
            raise ValueError(
                f"expected gamma > 0, alpha > 0, chi < 0; got "
                f"gamma={self.gamma}, alpha={self.alpha}, chi={self.chi}")


def characteristic_coefficients(params: Parameters, lam: float) -> np.ndarray:
    """Quintic coefficients, highest degree first."""
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    beta, eta, ab = params.beta, params.eta, params.a * params.b
    return np.array([
        1.0,
        eta,
        2.0 * lam,
        lam * (2.0 * eta - beta),
        lam * lam - ab,
        lam * lam * (eta - beta) - eta * ab,
    ])


def cubic_coefficients(params: Parameters, lam: float) -> np.ndarray:
    """Decoupled-limit cubic: Z^3 + eta Z^2 + lam Z + lam (eta - beta)."""
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    return np.array([1.0, params.eta, lam, lam * (params.eta - params.beta)])


def asymptotic_seeds(params: Parameters, lam: float):
    """Large-lam expansions of (r, w, z), truncated after the displayed terms."""
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    beta, eta, ab = params.beta, params.eta, params.a * params.b
    rtlam = math.sqrt(lam)
    r0 = beta - eta - beta * (beta - eta) ** 2 / lam
    omega0 = complex(
        rtlam + (beta / 2.0) * (0.75 * beta - eta) / rtlam,
        beta / 2.0 - (beta * (beta - eta) ** 2 / 2.0 + ab / (2.0 * beta)) / lam,
    )
    zeta0 = complex(
        rtlam + eta * ab / (2.0 * beta * lam * rtlam),
        ab / (2.0 * beta * lam) + ab * ab / (2.0 * beta ** 3 * lam * lam),
    )
    return r0, omega0, zeta0


def _split_roots(roots: np.ndarray, what: str):
    """Pick out the unique real root and the two upper-half-plane roots."""
    real_tol = 1e-8 * (1.0 + np.abs(roots))
    real_mask = np.abs(roots.imag) < real_tol
    if np.count_nonzero(real_mask) != 1:
        raise ClassificationError(
            f"{what}: expected exactly one real root, found "
            f"{np.count_nonzero(real_mask)} among {roots}")
    r = float(roots[real_mask][0].real)
    complex_roots = roots[~real_mask]
    upper = complex_roots[complex_roots.imag > 0]
    lower = complex_roots[complex_roots.imag < 0]
    if len(upper) != len(lower):
        raise ClassificationError(f"{what}: unpaired complex roots {complex_roots}")
    # conjugate pairing: every upper root must have a lower partner
    for zu in upper:
        d = np.min(np.abs(lower - np.conj(zu)))
        if d > 1e-8 * (1.0 + abs(zu)):
            raise ClassificationError(
                f"{what}: conjugate pairing failure at root {zu} (gap {d:.2e})")
    return r, upper


def solve_quintic(params: Parameters, lam: float, n: int = 0) -> ModeSpectrum:
    """All five characteristic roots, classified into (r, omega, zeta)."""
    coeffs = characteristic_coefficients(params, lam)
    roots = np.roots(coeffs)
    r, upper = _split_roots(roots, f"mode n={n}, lam={lam}")
    if len(upper) != 2:
        raise ClassificationError(
            f"mode n={n}, lam={lam}: expected two conjugate pairs, got {len(upper)}")

    # candidates in the frequency plane: upper root z corresponds to i*w, so w = -i*z
    cand = sorted(-1j * upper, key=lambda w: w.real)
    _, omega0, zeta0 = asymptotic_seeds(params, lam)
    # two-candidate assignment by minimal total seed distance
    direct = abs(cand[0] - omega0) + abs(cand[1] - zeta0)
    swapped = abs(cand[0] - zeta0) + abs(cand[1] - omega0)
    omega, zeta = (cand[0], cand[1]) if direct <= swapped else (cand[1], cand[0])

    ms = ModeSpectrum(n=n, lam=float(lam), r=r, omega=complex(omega), zeta=complex(zeta))
    _validate_mode(params, ms)
    return ms


def _validate_mode(params: Parameters, ms: ModeSpectrum) -> None:
    res = quintic_residuals(params, ms)
    res_tol = 1e-10 * (1.0 + ms.lam ** 3)
    if np.max(res) > res_tol:
        raise ClassificationError(
            f"mode n={ms.n}: residual {np.max(res):.3e} exceeds {res_tol:.3e}")
    vieta = ms.r - 2.0 * ms.omega.imag - 2.0 * ms.zeta.imag
    if abs(vieta + params.eta) > 1e-9 * (1.0 + params.eta):
        raise ClassificationError(
            f"mode n={ms.n}: Vieta trace {vieta} != {-params.eta}")
    roots = ms.roots()
    dist_tol = 1e-8 * (1.0 + math.sqrt(ms.lam))
    for i in range(5):
        for j in range(i + 1, 5):
            if abs(roots[i] - roots[j]) < dist_tol:
                raise ClassificationError(
                    f"mode n={ms.n}: roots {i},{j} coincide: {roots[i]}, {roots[j]}")
    if abs(ms.r + params.eta) < dist_tol or abs(ms.zeta) < dist_tol:
        raise ClassificationError(
            f"mode n={ms.n}: degenerate root location (r={ms.r}, zeta={ms.zeta})")


def quintic_residuals(params: Parameters, ms: ModeSpectrum) -> np.ndarray:
    """|P(root)| for the representative roots (r, i omega, i zeta)."""
    coeffs = characteristic_coefficients(params, ms.lam)
    pts = np.array([ms.r, 1j * ms.omega, 1j * ms.zeta])
    return np.abs(np.polyval(coeffs, pts))


def solve_cubic(params: Parameters, lam: float):
    """Roots of the decoupled-limit cubic: the real one and the Im > 0 one."""
    roots = np.roots(cubic_coefficients(params, lam))
    r, upper = _split_roots(roots, f"cubic at lam={lam}")
    if len(upper) != 1:
        raise ClassificationError(
            f"cubic at lam={lam}: expected one conjugate pair, got {len(upper)}")
    return r, complex(upper[0])


def string_spectrum(params: Parameters, N: int) -> list[ModeSpectrum]:
    """Spectra for the string eigenvalues lam_n = n^2, n = 1..N."""
    if N < 1:
        raise ValueError("N must be at least 1")
    return [solve_quintic(params, float(n * n), n=n) for n in range(1, N + 1)]


def sequence_constants(spectra: list[ModeSpectrum]) -> SequenceConstants:
    """Estimate (gamma, alpha, chi) from the tail of a computed spectrum list."""
    if len(spectra) < 8:
        raise ValueError("need at least 8 modes to estimate sequence constants")
    ns = [ms.n for ms in spectra]
    if ns != sorted(ns) or len(set(ns)) != len(ns):
        raise ValueError("spectra must be sorted by mode index")
    re_omega = np.array([ms.omega.real for ms in spectra])
    re_zeta = np.array([ms.zeta.real for ms in spectra])
    if np.any(np.diff(re_omega) <= 0) or np.any(np.diff(re_zeta) <= 0):
        raise ValueError("Re omega / Re zeta sequences must be strictly increasing")
    half = len(spectra) // 2
    gaps = np.concatenate([np.diff(re_omega[half - 1:]), np.diff(re_zeta[half - 1:])])
    return SequenceConstants(
        gamma=float(np.min(gaps)),
        alpha=float(spectra[-1].omega.imag),
        chi=float(spectra[-1].r),
    )
