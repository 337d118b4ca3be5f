"""
Emission spectrum from the photon two-time correlator

In the noise-free regime the correlator is K(t, tau) = C*_10(t) C_10(t + tau)
and the detected spectrum is

    S(nu) = (1/pi) Re int_0^T dt int_0^tau_max dtau exp(i nu tau / hbar) K(t, tau) / hbar^2

in meV^-2. Spectra are relative: the detector constant is dropped.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
from scipy import signal

from darkshield.core.exceptions import DomainError
from darkshield.core.model import SingleExcitationState
from darkshield.core.units import HBAR
from darkshield.physics.single_excitation import resonant_solution

logger = logging.getLogger(__name__)

DEFAULT_CUTOFF = 40.0
FREQUENCY_CONVENTIONS = ("relative", "absolute")
NU_CHUNK = 256


@dataclass(frozen=True)
class SpectrumResult:
    """
    Power spectral density on a frequency grid

    nu is nu - omega (relative) or nu itself (absolute), in meV.
    tail_bound is exp(-mu T_max / 2) for numeric spectra, None otherwise.
    """

    nu: np.ndarray
    s: np.ndarray
    convention: str = "relative"
    cavity_frequency: float = 0.0
    tail_bound: Optional[float] = None

    def __post_init__(self):
        nu = np.asarray(self.nu, dtype=float).reshape(-1)
        s = np.asarray(self.s, dtype=float).reshape(-1)
        if nu.size != s.size:
            raise DomainError(f"Spectrum has {nu.size} frequencies but {s.size} values")
        if nu.size > 1 and np.any(np.diff(nu) <= 0):
            raise DomainError("Frequency grid must be strictly increasing")
        if self.convention not in FREQUENCY_CONVENTIONS:
            raise DomainError(f"Unknown frequency convention '{self.convention}'")
        object.__setattr__(self, "nu", nu)
        object.__setattr__(self, "s", s)

    @property
    def detuning(self) -> np.ndarray:
        """nu - omega whatever the stored convention"""
        if self.convention == "absolute":
            return self.nu - self.cavity_frequency
        return self.nu


@dataclass(frozen=True)
class Peak:
    position: float
    height: float
    fwhm: float


def _relative_grid(nu_grid: Sequence[float], convention: str, omega: float) -> np.ndarray:
    if convention not in FREQUENCY_CONVENTIONS:
        raise DomainError(f"Unknown frequency convention '{convention}'")
    nu = np.asarray(nu_grid, dtype=float).reshape(-1)
    return nu - omega if convention == "absolute" else nu


def _single_qubit_state(count: int) -> SingleExcitationState:
    if count < 1:
        raise DomainError(f"Need at least one qubit, got {count}")
    return SingleExcitationState.qubit_excited(count, 1)


def correlator_analytic(t, tau, rabi: float, mu: float, count: int) -> np.ndarray:
    """
    K(t, tau) for one of N equally coupled resonant qubits initially excited

    K = (|Omega_R|^2 / Sigma^2) exp(-mu tau / 4) exp(-mu t / 2) sin(Sigma t) sin(Sigma (t + tau))
    with Sigma = sqrt(N |Omega_R|^2 - mu^2 / 16); the overdamped branch uses
    the same expression with imaginary Sigma. t and tau are in fs.
    """
    if count * abs(rabi) ** 2 <= mu ** 2 / 16.0:
        logger.debug("Correlator evaluated on the overdamped branch")
    solution = resonant_solution(_single_qubit_state(count), mu, np.full(count, rabi, dtype=complex))
    t = np.asarray(t, dtype=float)
    tau = np.asarray(tau, dtype=float)
    return np.conj(solution.c10(t)) * solution.c10(t + tau)


def spectrum_analytic(
    nu_grid: Sequence[float],
    rabi: float,
    mu: float,
    count: int,
    omega: float = 0.0,
    convention: str = "relative",
) -> SpectrumResult:
    """
    S(nu) = (1/2 pi) |Omega_R|^2 / {[(nu - omega)^2 - (N |Omega_R|^2 - mu^2/8)]^2
             + (mu^2/4)(N |Omega_R|^2 - mu^2/16)}

    Args:
        nu_grid: Frequencies in meV, relative to omega or absolute per convention
        rabi: Single-qubit Rabi energy in meV
        mu: Cavity decay in meV
        count: Number of qubits N
        omega: Cavity frequency in meV (absolute convention only)
        convention: "relative" or "absolute"
    """
    if count < 1:
        raise DomainError(f"Need at least one qubit, got {count}")
    x = _relative_grid(nu_grid, convention, omega)
    rabi2 = abs(rabi) ** 2
    denominator = (x ** 2 - (count * rabi2 - mu ** 2 / 8.0)) ** 2 + (mu ** 2 / 4.0) * (
        count * rabi2 - mu ** 2 / 16.0
    )
    s = rabi2 / (2.0 * np.pi * denominator)
    return SpectrumResult(nu=np.asarray(nu_grid, dtype=float), s=s, convention=convention, cavity_frequency=omega)


def _trapezoid_weights(count: int) -> np.ndarray:
    weights = np.ones(count)
    weights[0] = weights[-1] = 0.5
    return weights


def spectrum_from_correlator(
    correlator: Sequence[complex],
    dtau: float,
    nu_grid: Sequence[float],
    omega: float = 0.0,
    convention: str = "relative",
    tail_bound: Optional[float] = None,
) -> SpectrumResult:
    """
    (1/pi) Re int_0^tau_max exp(i nu tau / hbar) G(tau) dtau / hbar^2

    G(tau) = int K(t, tau) dt sampled every dtau fs, starting at tau = 0.
    """
    g = np.asarray(correlator, dtype=complex).reshape(-1)
    if g.size < 2:
        raise DomainError("Correlator needs at least two samples")
    x = _relative_grid(nu_grid, convention, omega)
    tau = np.arange(g.size) * dtau
    weighted = g * _trapezoid_weights(g.size) * dtau / HBAR ** 2

    s = np.empty(x.size)
    for start in range(0, x.size, NU_CHUNK):
        chunk = x[start:start + NU_CHUNK]
        phases = np.exp(1j * np.outer(chunk, tau) / HBAR)
        s[start:start + NU_CHUNK] = (phases @ weighted).real / np.pi
    return SpectrumResult(
        nu=np.asarray(nu_grid, dtype=float), s=s, convention=convention,
        cavity_frequency=omega, tail_bound=tail_bound,
    )


def spectrum_numeric(
    c10: Sequence[complex],
    times: Sequence[float],
    nu_grid: Sequence[float],
    t_max: float,
    tau_max: float,
    mu: Optional[float] = None,
    omega: float = 0.0,
    convention: str = "relative",
) -> SpectrumResult:
    """
    Numeric spectrum from a sampled photon amplitude

    Both integrals use the trapezoid rule on the trajectory grid, which must
    be uniform and start at 0. The time integral for every lag is one FFT
    correlation.

    Args:
        c10: C_10 samples
        times: Uniform grid in fs covering [0, t_max + tau_max]
        nu_grid: Frequencies in meV
        t_max: Upper limit of the t integral in fs
        tau_max: Upper limit of the tau integral in fs
        mu: Cavity decay in meV; when given the tail bound exp(-mu T_max / 2) is reported
        omega: Cavity frequency in meV (absolute convention only)
        convention: "relative" or "absolute"

    Raises:
        DomainError: If the trajectory does not cover [0, t_max + tau_max]
    """
    c10 = np.asarray(c10, dtype=complex).reshape(-1)
    times = np.asarray(times, dtype=float).reshape(-1)
    if c10.size != times.size or times.size < 3:
        raise DomainError("Trajectory and time grid must match and hold at least three samples")
    dt = times[1] - times[0]
    if dt <= 0 or not np.allclose(np.diff(times), dt, rtol=1e-9, atol=0.0):
        raise DomainError("Numeric spectrum needs a uniform, increasing time grid")
    if abs(times[0]) > 1e-12 * max(1.0, abs(dt)):
        raise DomainError(f"Trajectory must start at t = 0, got {times[0]} fs")

    n_t = int(round(t_max / dt))
    n_tau = int(round(tau_max / dt))
    if n_t < 1 or n_tau < 1:
        raise DomainError("T_max and tau_max must span at least one time step")
    if n_t + n_tau >= times.size:
        raise DomainError(
            f"Trajectory covers {times[-1]:.6g} fs but T_max + tau_max = {(n_t + n_tau) * dt:.6g} fs"
        )

    weights = _trapezoid_weights(n_t + 1)
    correlator = signal.correlate(
        c10[: n_t + n_tau + 1], c10[: n_t + 1] * weights, mode="valid", method="fft"
    ) * dt
    logger.debug(f"Correlator on {n_t + 1} x {n_tau + 1} samples (dt = {dt:.4g} fs)")

    tail = float(np.exp(-mu * n_t * dt / (2.0 * HBAR))) if mu is not None else None
    return spectrum_from_correlator(correlator, dt, nu_grid, omega=omega, convention=convention, tail_bound=tail)


def peak_summary(spec: SpectrumResult) -> List[Peak]:
    """
    Local maxima with parabolic refinement and FWHM from half-height crossings

    Crossings are linearly interpolated on the frequency grid; a flat or
    monotone spectrum yields no peaks.
    """
    s = spec.s
    nu = spec.nu
    if s.size < 3:
        return []
    indices, _ = signal.find_peaks(s)
    if indices.size == 0:
        return []
    widths, _, left, right = signal.peak_widths(s, indices, rel_height=0.5)
    positions_index = np.arange(s.size, dtype=float)

    peaks = []
    for index, left_ip, right_ip in zip(indices, left, right):
        y0, y1, y2 = s[index - 1], s[index], s[index + 1]
        curvature = y0 - 2.0 * y1 + y2
        offset = 0.5 * (y0 - y2) / curvature if curvature != 0 else 0.0
        position = float(np.interp(index + offset, positions_index, nu))
        height = float(y1 - 0.25 * (y0 - y2) * offset)
        fwhm = float(np.interp(right_ip, positions_index, nu) - np.interp(left_ip, positions_index, nu))
        peaks.append(Peak(position=position, height=height, fwhm=fwhm))
    return peaks
