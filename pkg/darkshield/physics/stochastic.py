"""
Stochastic Schroedinger equation for the single-excitation manifold

Each amplitude evolves under the non-Hermitian drift with damping
gamma_00 = 0, gamma_10 = mu/2, gamma_0j = gamma_j/2 + gamma_el_j, plus
complex Gaussian Langevin increments sqrt(D_a dt / hbar) xi at zero
temperature:

    D_00  = sum_j gamma_j <|C_0j|^2> + mu <|C_10|^2>
    D_0j  = 2 gamma_el_j <|C_0j|^2>     (mean-square form, keeps the mean norm)
    D_0j  = 2 gamma_el_j                (constant form)

The ensemble means entering D come from the exact second-moment equation,
which is closed at zero temperature. The excited manifold never receives the
C_00 noise.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg
from scipy.integrate import solve_ivp

from darkshield.core.exceptions import DomainError, IntegrationError, StabilityError
from darkshield.core.model import QubitEnsemble, RelaxationSpec, SingleExcitationState, Trajectory
from darkshield.core.units import HBAR
from darkshield.physics.single_excitation import (
    DEFAULT_ATOL,
    DEFAULT_METHOD,
    DEFAULT_RTOL,
    excited_generator,
    from_rotating,
)

logger = logging.getLogger(__name__)

DEPHASING_FORMS = ("mean-square", "constant")
STABILITY_LIMIT = 0.1
DEFAULT_CHUNK = 256

SeedLike = Union[int, np.random.SeedSequence]


@dataclass(frozen=True)
class SSESpec:
    """Reservoir rates at zero temperature (meV)"""

    mu: float
    relaxation: RelaxationSpec
    dephasing_noise: str = "mean-square"
    temperature: float = 0.0

    def __post_init__(self):
        if self.mu < 0:
            raise DomainError(f"Cavity decay must be nonnegative, got {self.mu}")
        if self.dephasing_noise not in DEPHASING_FORMS:
            raise DomainError(
                f"Unknown dephasing noise form '{self.dephasing_noise}'; "
                f"expected one of {', '.join(DEPHASING_FORMS)}"
            )
        if self.temperature != 0.0:
            raise DomainError("Only zero-temperature reservoirs are supported")
        if self.dephasing_noise == "constant" and np.any(self.relaxation.elastic > 0):
            logger.warning("Constant dephasing noise does not conserve the ensemble-mean norm")

    @property
    def count(self) -> int:
        return self.relaxation.count


@dataclass(frozen=True)
class NoiseRealization:
    """
    Standard complex Gaussian increments xi, shape (steps, channels)

    E[xi] = 0, E|xi|^2 = 1 with independent real and imaginary parts.
    Channel 0 drives C_00, channel j drives C_0j.
    """

    seed: Optional[int]
    dt: float
    increments: np.ndarray


def decay_rates(spec: SSESpec) -> Tuple[float, float, np.ndarray]:
    """(gamma_00, gamma_10, gamma_0j) amplitude damping in meV"""
    relaxation = spec.relaxation
    return 0.0, spec.mu / 2.0, relaxation.inelastic / 2.0 + relaxation.elastic


def relaxation_times(spec: SSESpec) -> Tuple[np.ndarray, np.ndarray]:
    """(T1_j, T2_j) in fs; T2 = 2 T1 without pure dephasing"""
    return spec.relaxation.t1, spec.relaxation.t2


def _seed_sequence(seed: SeedLike) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(int(seed))


def _seed_value(seed: SeedLike) -> Optional[int]:
    if isinstance(seed, np.random.SeedSequence):
        return int(seed.entropy) if isinstance(seed.entropy, int) else None
    return int(seed)


def _spawn_key(seed: SeedLike) -> Tuple[int, ...]:
    return tuple(seed.spawn_key) if isinstance(seed, np.random.SeedSequence) else ()


def generate_noise(seed: SeedLike, steps: int, channels: int, dt: float) -> NoiseRealization:
    """Draw one noise realisation from its own generator"""
    if steps < 0 or channels < 1:
        raise DomainError(f"Cannot draw {steps} x {channels} increments")
    rng = np.random.default_rng(_seed_sequence(seed))
    draws = rng.standard_normal((steps, channels, 2))
    increments = (draws[..., 0] + 1j * draws[..., 1]) / np.sqrt(2.0)
    return NoiseRealization(seed=_seed_value(seed), dt=dt, increments=increments)


def _generator(spec: SSESpec, ensemble: QubitEnsemble) -> np.ndarray:
    if spec.count != ensemble.count:
        raise DomainError(f"Relaxation rates for {spec.count} qubits, ensemble has {ensemble.count}")
    _, _, gamma = decay_rates(spec)
    return excited_generator(spec.mu, np.asarray(ensemble.rabi), np.asarray(ensemble.detunings), gamma)


def _dephasing_source(spec: SSESpec, populations: np.ndarray) -> np.ndarray:
    elastic = spec.relaxation.elastic
    if spec.dephasing_noise == "constant":
        return 2.0 * elastic * np.ones_like(populations)
    return 2.0 * elastic * populations


def second_moments(
    initial: SingleExcitationState,
    spec: SSESpec,
    ensemble: QubitEnsemble,
    t_grid: Sequence[float],
    method: str = DEFAULT_METHOD,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
) -> np.ndarray:
    """
    Ensemble second moments rho = <y y^dagger> of y = [C_10, D_1..D_N]

    hbar d rho/dt = G rho + rho G^dagger + diag(0, D_0j). Returns shape
    (T, N+1, N+1) in the rotating frame.
    """
    t_grid = np.asarray(t_grid, dtype=float).reshape(-1)
    generator = _generator(spec, ensemble)
    size = generator.shape[0]
    y0 = initial.vector * np.concatenate(([1.0], np.exp(-1j * ensemble.detunings * t_grid[0] / HBAR)))
    rho0 = np.outer(y0, np.conj(y0))
    adjoint = generator.conj().T

    def rhs(t, flat):
        rho = flat.reshape(size, size)
        change = generator @ rho + rho @ adjoint
        change[np.arange(1, size), np.arange(1, size)] += _dephasing_source(spec, np.diag(rho)[1:].real)
        return change.reshape(-1) / HBAR

    if t_grid.size == 1:
        return rho0[np.newaxis]
    solution = solve_ivp(
        rhs, (t_grid[0], t_grid[-1]), rho0.reshape(-1).astype(complex),
        method=method, t_eval=t_grid, rtol=rtol, atol=atol,
    )
    if not solution.success:
        raise IntegrationError(
            f"Second-moment integration failed: {solution.message}",
            {"message": solution.message, "nfev": int(solution.nfev)},
        )
    return solution.y.T.reshape(t_grid.size, size, size)


def _diffusion(spec: SSESpec, moments: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """D_00 (K,) and D_0j (K, N) on the internal grid"""
    photon = moments[:, 0, 0].real
    qubits = np.einsum("kii->ki", moments[:, 1:, 1:]).real
    ground = spec.relaxation.inelastic @ qubits.T + spec.mu * photon
    return np.clip(ground, 0.0, None), np.clip(_dephasing_source(spec, qubits), 0.0, None)


def _internal_grid(t_grid: np.ndarray, substeps: int) -> Tuple[np.ndarray, float]:
    if t_grid.size < 2:
        raise DomainError("SSE integration needs at least two output times")
    steps = np.diff(t_grid)
    dt = steps[0]
    if dt <= 0 or not np.allclose(steps, dt, rtol=1e-9, atol=0.0):
        raise DomainError("SSE output grid must be uniform and increasing")
    if substeps < 1:
        raise DomainError(f"substeps must be positive, got {substeps}")
    h = dt / substeps
    internal = t_grid[0] + h * np.arange((t_grid.size - 1) * substeps + 1)
    return internal, h


def _check_stability(generator: np.ndarray, h: float) -> None:
    max_rate = float(np.max(np.abs(linalg.eigvals(generator)))) / HBAR
    if h * max_rate > STABILITY_LIMIT:
        raise StabilityError(
            f"Step {h:.4g} fs too coarse: dt * max rate = {h * max_rate:.3g} > {STABILITY_LIMIT}",
            details={"dt": h, "max_rate": max_rate},
        )


def _propagate(
    initial: SingleExcitationState,
    spec: SSESpec,
    ensemble: QubitEnsemble,
    t_grid: np.ndarray,
    seeds: Sequence[np.random.SeedSequence],
    substeps: int,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Integrate a batch; returns c00 (K, T), c10 (K, T), c0 (K, T, N)"""
    generator = _generator(spec, ensemble)
    internal, h = _internal_grid(t_grid, substeps)
    _check_stability(generator, h)

    moments = second_moments(initial, spec, ensemble, internal)
    ground_diffusion, qubit_diffusion = _diffusion(spec, moments)
    ground_scale = np.sqrt(ground_diffusion * h / HBAR)
    qubit_scale = np.sqrt(qubit_diffusion * h / HBAR)
    propagator = linalg.expm(generator * h / HBAR)

    steps = internal.size - 1
    count = ensemble.count
    noise = np.stack([generate_noise(seed, steps, count + 1, h).increments for seed in seeds])

    y = np.tile(initial.vector * np.concatenate(([1.0], np.exp(-1j * ensemble.detunings * internal[0] / HBAR))),
                (len(seeds), 1))
    c00 = np.full(len(seeds), initial.c00, dtype=complex)

    out_y = np.empty((len(seeds), t_grid.size, count + 1), dtype=complex)
    out_c00 = np.empty((len(seeds), t_grid.size), dtype=complex)
    out_y[:, 0] = y
    out_c00[:, 0] = c00
    for k in range(steps):
        c00 = c00 + ground_scale[k] * noise[:, k, 0]
        y = y @ propagator.T
        y[:, 1:] += qubit_scale[k] * noise[:, k, 1:]
        if (k + 1) % substeps == 0:
            out_y[:, (k + 1) // substeps] = y
            out_c00[:, (k + 1) // substeps] = c00

    c0 = np.stack([from_rotating(out_y[i, :, 1:], ensemble.detunings, t_grid) for i in range(len(seeds))])
    return out_c00, out_y[:, :, 0], c0


def sse_trajectory(
    initial: SingleExcitationState,
    spec: SSESpec,
    ensemble: QubitEnsemble,
    t_grid: Sequence[float],
    seed: SeedLike,
    substeps: int = 1,
) -> Trajectory:
    """
    One stochastic trajectory

    The drift is propagated exactly over each step and the Langevin
    increments are added Euler-Maruyama style.

    Args:
        initial: State at t_grid[0]
        spec: Reservoir rates
        ensemble: Qubit detunings and Rabi energies
        t_grid: Uniform output times in fs
        seed: Integer seed or SeedSequence for this trajectory
        substeps: Integration steps per output interval

    Raises:
        StabilityError: If dt * max rate > 0.1
    """
    t_grid = np.asarray(t_grid, dtype=float).reshape(-1)
    c00, c10, c0 = _propagate(initial, spec, ensemble, t_grid, [_seed_sequence(seed)], substeps)
    return Trajectory(
        times=t_grid, c00=c00[0], c10=c10[0], c0=c0[0], seed=_seed_value(seed), spawn_key=_spawn_key(seed)
    )


def run_sse_ensemble(
    initial: SingleExcitationState,
    spec: SSESpec,
    ensemble: QubitEnsemble,
    t_grid: Sequence[float],
    trajectories: int,
    seed: int,
    substeps: int = 1,
    chunk: int = DEFAULT_CHUNK,
) -> List[Trajectory]:
    """
    Independent trajectories from SeedSequence(seed).spawn(trajectories)

    Trajectory k draws the same noise as sse_trajectory(..., seed=children[k]) and
    records spawn_key (k,), so trajectory.seed_sequence() reproduces it alone.
    """
    if trajectories < 1:
        raise DomainError(f"Need at least one trajectory, got {trajectories}")
    t_grid = np.asarray(t_grid, dtype=float).reshape(-1)
    children = np.random.SeedSequence(seed).spawn(trajectories)
    logger.info(f"Sampling {trajectories} SSE trajectories (seed {seed}, {spec.dephasing_noise} dephasing)")

    results: List[Trajectory] = []
    for start in range(0, trajectories, chunk):
        batch = children[start:start + chunk]
        c00, c10, c0 = _propagate(initial, spec, ensemble, t_grid, batch, substeps)
        for i, child in enumerate(batch):
            results.append(Trajectory(
                times=t_grid, c00=c00[i], c10=c10[i], c0=c0[i], seed=seed, spawn_key=tuple(child.spawn_key)
            ))
        logger.debug(f"Finished {start + len(batch)}/{trajectories} trajectories")
    return results


@dataclass(frozen=True)
class EnsembleStatistics:
    times: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    samples: int = field(default=0)


def ensemble_average(
    trajectories: Sequence[Trajectory],
    observable: Callable[[Trajectory], np.ndarray],
) -> EnsembleStatistics:
    """
    Mean and standard error of an observable per time point

    Raises:
        DomainError: With fewer than two trajectories or mismatched grids
    """
    if len(trajectories) < 2:
        raise DomainError("Ensemble statistics need at least two trajectories")
    times = trajectories[0].times
    for trajectory in trajectories[1:]:
        if trajectory.times.shape != times.shape or not np.array_equal(trajectory.times, times):
            raise DomainError("Trajectories are on different time grids")
    values = np.stack([np.asarray(observable(trajectory)) for trajectory in trajectories])
    mean = values.mean(axis=0)
    stderr = values.std(axis=0, ddof=1) / np.sqrt(values.shape[0])
    return EnsembleStatistics(times=times, mean=mean, stderr=stderr, samples=values.shape[0])
