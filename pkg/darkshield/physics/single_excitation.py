"""
Single-excitation dynamics of N qubits in a lossy cavity

The excited manifold is spanned by the photon amplitude C_10 and the qubit
amplitudes C_0j. The ground amplitude C_00 never feeds back into it and is
reconstructed from the norm. Energies are in meV, times in fs.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy.integrate import solve_ivp

from darkshield.core.exceptions import (
    DegenerateCouplingError,
    DomainError,
    IntegrationError,
    PreconditionError,
)
from darkshield.core.model import QubitEnsemble, SingleExcitationState, Trajectory
from darkshield.core.units import HBAR

logger = logging.getLogger(__name__)

DEFAULT_METHOD = "DOP853"
DEFAULT_RTOL = 1e-10
DEFAULT_ATOL = 1e-12


def collective_rabi(rabi: Union[QubitEnsemble, Sequence[complex], np.ndarray]) -> float:
    """Omega_N = sqrt(sum_j |Omega_Rj|^2) in meV"""
    if isinstance(rabi, QubitEnsemble):
        return rabi.collective_rabi
    rabi = np.asarray(rabi, dtype=complex)
    return float(np.sqrt(np.sum(np.abs(rabi) ** 2)))


def coupling_amplitude(state: SingleExcitationState, rabi: Sequence[complex]) -> complex:
    """F = sum_j Omega*_Rj C_0j, the qubit combination the cavity couples to"""
    rabi = _as_rabi(rabi, state.count)
    return complex(np.dot(np.conj(rabi), state.c0))


def _as_rabi(rabi: Sequence[complex], count: int) -> np.ndarray:
    rabi = np.asarray(rabi, dtype=complex).reshape(-1)
    if rabi.size != count:
        raise DomainError(f"Got {rabi.size} Rabi energies for {count} qubits")
    return rabi


def _ground_amplitude(initial: SingleExcitationState, excited: np.ndarray) -> np.ndarray:
    """|C_00|^2 = norm(0) - excited population, phase kept from C_00(0)"""
    phase = initial.c00 / abs(initial.c00) if initial.c00 != 0 else 1.0
    return phase * np.sqrt(np.clip(initial.norm - excited, 0.0, None))


def _sin_ratio(sigma: complex, t: np.ndarray) -> np.ndarray:
    """sin(sigma t) / sigma with the critical-damping limit t at sigma = 0"""
    if sigma == 0:
        return t.astype(complex)
    return np.sin(sigma * t) / sigma


@dataclass(frozen=True)
class ResonantSolution:
    """
    Closed-form resonant dynamics C_10(t) = A exp(-i K1 t) + B exp(-i K2 t)

    sigma, k1 and k2 are energies in meV; sigma is imaginary on the overdamped
    branch Omega_N < mu/4, and A, B are undefined (nan) at critical damping.
    """

    sigma: complex
    k1: complex
    k2: complex
    a: complex
    b: complex
    mu: float
    omega_n: float
    c10_initial: complex
    f_initial: complex

    @property
    def is_underdamped(self) -> bool:
        return self.omega_n > self.mu / 4.0

    def c10(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float) / HBAR
        sigma = self.sigma
        ratio = _sin_ratio(sigma, t)
        envelope = np.exp(-self.mu * t / 4.0)
        return envelope * (
            self.c10_initial * (np.cos(sigma * t) - self.mu / 4.0 * ratio)
            + 1j * self.f_initial * ratio
        )

    def f(self, t: np.ndarray) -> np.ndarray:
        """F(t); companion of c10 from dF/dt = i Omega_N^2 C_10"""
        t = np.asarray(t, dtype=float) / HBAR
        sigma = self.sigma
        ratio = _sin_ratio(sigma, t)
        envelope = np.exp(-self.mu * t / 4.0)
        return envelope * (
            self.f_initial * (np.cos(sigma * t) + self.mu / 4.0 * ratio)
            + 1j * self.omega_n ** 2 * self.c10_initial * ratio
        )


def resonant_solution(
    initial: SingleExcitationState,
    mu: float,
    rabi: Sequence[complex],
) -> ResonantSolution:
    """
    Mode data of the resonant two-variable (C_10, F) system

    Args:
        initial: State at t = 0
        mu: Cavity decay in meV
        rabi: Rabi energies in meV

    Returns:
        ResonantSolution
    """
    rabi = _as_rabi(rabi, initial.count)
    omega_n = collective_rabi(rabi)
    f0 = coupling_amplitude(initial, rabi)
    c0 = initial.c10
    sigma = complex(np.sqrt(complex(omega_n ** 2 - mu ** 2 / 16.0)))
    k1 = sigma - 1j * mu / 4.0
    k2 = -sigma - 1j * mu / 4.0
    if sigma != 0:
        a = c0 / 2 - 1j * c0 * mu / (8 * sigma) - f0 / (2 * sigma)
        b = c0 / 2 + 1j * c0 * mu / (8 * sigma) + f0 / (2 * sigma)
    else:
        a = b = complex("nan")
    return ResonantSolution(
        sigma=sigma, k1=k1, k2=k2, a=a, b=b, mu=mu, omega_n=omega_n,
        c10_initial=c0, f_initial=f0,
    )


def _check_resonant(detunings: Optional[Sequence[float]]) -> None:
    if detunings is not None and np.any(np.asarray(detunings, dtype=float) != 0.0):
        raise PreconditionError("Analytic resonant solution requires all detunings to vanish")


def resonant_trajectory(
    initial: SingleExcitationState,
    mu: float,
    rabi: Sequence[complex],
    times: Sequence[float],
    detunings: Optional[Sequence[float]] = None,
) -> Trajectory:
    """
    Evaluate the closed-form resonant solution on a time grid

    C_0j(t) = C_0j(0) + Omega_Rj (F(t) - F(0)) / Omega_N^2, which is the
    integral of i Omega_Rj C_10 in closed form.

    Raises:
        PreconditionError: If any detuning is nonzero
    """
    _check_resonant(detunings)
    rabi = _as_rabi(rabi, initial.count)
    times = np.asarray(times, dtype=float).reshape(-1)
    solution = resonant_solution(initial, mu, rabi)

    c10 = solution.c10(times)
    if solution.omega_n > 0:
        transfer = (solution.f(times) - solution.f_initial) / solution.omega_n ** 2
        c0 = initial.c0[np.newaxis, :] + np.outer(transfer, rabi)
    else:
        c0 = np.repeat(initial.c0[np.newaxis, :], times.size, axis=0)

    excited = np.abs(c10) ** 2 + np.sum(np.abs(c0) ** 2, axis=1)
    return Trajectory(times=times, c00=_ground_amplitude(initial, excited), c10=c10, c0=c0)


def evolve_resonant_analytic(
    initial: SingleExcitationState,
    mu: float,
    rabi: Sequence[complex],
    t: float,
    detunings: Optional[Sequence[float]] = None,
) -> SingleExcitationState:
    """
    Resonant state at time t (fs) from the closed-form solution

    Args:
        initial: State at t = 0
        mu: Cavity decay in meV
        rabi: Rabi energies in meV
        t: Time in fs
        detunings: Optional detunings; any nonzero entry is rejected

    Returns:
        SingleExcitationState at t
    """
    return resonant_trajectory(initial, mu, rabi, [t], detunings)[0]


def asymptotic_state(initial: SingleExcitationState, rabi: Sequence[complex]) -> SingleExcitationState:
    """
    Long-time resonant state for mu > 0: the bright part is radiated away

    C_0j(inf) = C_0j(0) - Omega_Rj F(0) / Omega_N^2 and C_10(inf) = 0.

    Raises:
        DegenerateCouplingError: If Omega_N = 0
    """
    rabi = _as_rabi(rabi, initial.count)
    omega_n = collective_rabi(rabi)
    if omega_n == 0:
        raise DegenerateCouplingError("Asymptotic state is undefined for Omega_N = 0")
    f0 = coupling_amplitude(initial, rabi)
    c0 = initial.c0 - rabi * f0 / omega_n ** 2
    excited = np.array([np.sum(np.abs(c0) ** 2)])
    c00 = _ground_amplitude(initial, excited)[0]
    return SingleExcitationState(c00=c00, c10=0.0, c0=c0)


def bright_dark_decompose(
    initial: SingleExcitationState,
    rabi: Sequence[complex],
) -> Tuple[SingleExcitationState, SingleExcitationState]:
    """
    Split a state into its radiating and its cavity-decoupled parts

    The bright part holds C_10 and the qubit component along Omega_Rj; the dark
    part holds the orthogonal qubit component and the ground amplitude, both of
    which are stationary. bright + dark reproduces the input.

    Returns:
        (bright, dark)
    """
    rabi = _as_rabi(rabi, initial.count)
    omega_n = collective_rabi(rabi)
    if omega_n == 0:
        bright_c0 = np.zeros_like(initial.c0)
    else:
        bright_c0 = rabi * coupling_amplitude(initial, rabi) / omega_n ** 2
    bright = SingleExcitationState(c00=0.0, c10=initial.c10, c0=bright_c0)
    dark = SingleExcitationState(c00=initial.c00, c10=0.0, c0=initial.c0 - bright_c0)
    return bright, dark


def radiated_fraction(initial: SingleExcitationState, rabi: Sequence[complex]) -> float:
    """Excited population lost to the cavity as t -> inf (resonant, mu > 0)"""
    final = asymptotic_state(initial, rabi)
    return initial.excited_population - final.qubit_population


def is_dark(state: SingleExcitationState, rabi: Sequence[complex], tol: float = 1e-9) -> bool:
    """True when |C_10| <= tol and |F| <= tol * Omega_N"""
    rabi = _as_rabi(rabi, state.count)
    omega_n = collective_rabi(rabi)
    return abs(state.c10) <= tol and abs(coupling_amplitude(state, rabi)) <= tol * omega_n


def excited_generator(
    mu: float,
    rabi: np.ndarray,
    detunings: np.ndarray,
    amplitude_decay: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    Generator of the rotating-frame excited manifold, in meV

    y = [C_10, D_1..D_N] with D_j = C_0j exp(-i Delta_j t) obeys
    hbar dy/dt = G y, G = [[-mu/2, i Omega*], [i Omega, -(i Delta + gamma_0)]].
    """
    count = rabi.size
    decay = np.zeros(count) if amplitude_decay is None else np.asarray(amplitude_decay, dtype=float)
    generator = np.zeros((count + 1, count + 1), dtype=complex)
    generator[0, 0] = -mu / 2.0
    generator[0, 1:] = 1j * np.conj(rabi)
    generator[1:, 0] = 1j * rabi
    generator[1:, 1:] = np.diag(-(1j * detunings + decay))
    return generator


def to_rotating(c0: np.ndarray, detunings: np.ndarray, times: np.ndarray) -> np.ndarray:
    """C_0j -> D_j = C_0j exp(-i Delta_j t); c0 has shape (T, N)"""
    return c0 * np.exp(-1j * np.outer(times, detunings) / HBAR)


def from_rotating(d: np.ndarray, detunings: np.ndarray, times: np.ndarray) -> np.ndarray:
    """D_j -> C_0j = D_j exp(i Delta_j t); d has shape (T, N)"""
    return d * np.exp(1j * np.outer(times, detunings) / HBAR)


def _validate_grid(t_grid: Sequence[float]) -> np.ndarray:
    t_grid = np.asarray(t_grid, dtype=float).reshape(-1)
    if t_grid.size == 0:
        raise DomainError("Time grid is empty")
    if np.any(np.diff(t_grid) <= 0):
        raise DomainError("Time grid must be strictly increasing")
    return t_grid


def evolve_detuned_numeric(
    initial: SingleExcitationState,
    mu: float,
    rabi: Sequence[complex],
    detunings: Sequence[float],
    t_grid: Sequence[float],
    amplitude_decay: Optional[Sequence[float]] = None,
    method: str = DEFAULT_METHOD,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
) -> Trajectory:
    """
    Integrate the (N+1)-dimensional amplitude equations with detunings

    The initial state is taken at t_grid[0].

    Args:
        initial: Initial state
        mu: Cavity decay in meV
        rabi: Rabi energies in meV
        detunings: Detunings in meV
        t_grid: Output times in fs
        amplitude_decay: Per-qubit amplitude damping gamma_0j in meV (zero when omitted)
        method: solve_ivp method
        rtol: Relative tolerance
        atol: Absolute tolerance

    Returns:
        Trajectory on t_grid

    Raises:
        IntegrationError: If the adaptive solver fails
    """
    rabi = _as_rabi(rabi, initial.count)
    detunings = np.asarray(detunings, dtype=float).reshape(-1)
    if detunings.size != initial.count:
        raise DomainError(f"Got {detunings.size} detunings for {initial.count} qubits")
    if amplitude_decay is not None:
        amplitude_decay = np.asarray(amplitude_decay, dtype=float).reshape(-1)
        if amplitude_decay.size != initial.count or np.any(amplitude_decay < 0):
            raise DomainError("Amplitude decay rates must be N nonnegative values")
    t_grid = _validate_grid(t_grid)

    rates = excited_generator(mu, rabi, detunings, amplitude_decay) / HBAR
    y0 = np.concatenate(([initial.c10], to_rotating(initial.c0[np.newaxis, :], detunings, t_grid[:1])[0]))

    if t_grid.size == 1:
        values = y0[:, np.newaxis]
    else:
        logger.debug(f"Integrating {rates.shape[0]} amplitudes over {t_grid[0]}..{t_grid[-1]} fs ({method})")
        solution = solve_ivp(
            lambda t, y: rates @ y,
            (t_grid[0], t_grid[-1]),
            y0,
            method=method,
            t_eval=t_grid,
            rtol=rtol,
            atol=atol,
        )
        if not solution.success:
            diagnostics = {
                "message": solution.message,
                "nfev": int(solution.nfev),
                "t_reached": float(solution.t[-1]) if solution.t.size else float(t_grid[0]),
            }
            logger.error(f"Integration failed: {solution.message}")
            raise IntegrationError(f"Integration failed: {solution.message}", diagnostics)
        values = solution.y
        logger.debug(f"Integration finished after {solution.nfev} evaluations")

    c10 = values[0]
    c0 = from_rotating(values[1:].T, detunings, t_grid)
    excited = np.abs(c10) ** 2 + np.sum(np.abs(c0) ** 2, axis=1)
    return Trajectory(times=t_grid, c00=_ground_amplitude(initial, excited), c10=c10, c0=c0)
