"""
Shared value types for DarkShield

All energies are in meV and all times in fs. Array fields are stored as
read-only numpy arrays so instances can be shared between threads and
worker processes.
"""

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from darkshield.core.exceptions import DomainError
from darkshield.core.units import HBAR

NORM_TOLERANCE = 1e-9


def _frozen_array(values, dtype) -> np.ndarray:
    array = np.array(values, dtype=dtype).reshape(-1)
    array.flags.writeable = False
    return array


@dataclass(frozen=True)
class QubitEnsemble:
    """N two-level qubits coupled to one cavity mode"""

    detunings: np.ndarray
    rabi: np.ndarray
    positions: Optional[np.ndarray] = None

    def __post_init__(self):
        detunings = _frozen_array(self.detunings, float)
        rabi = _frozen_array(self.rabi, complex)
        object.__setattr__(self, "detunings", detunings)
        object.__setattr__(self, "rabi", rabi)

        if rabi.size < 1:
            raise DomainError("An ensemble needs at least one qubit")
        if detunings.size != rabi.size:
            raise DomainError(
                f"Got {detunings.size} detunings for {rabi.size} Rabi energies"
            )
        if not np.all(np.isfinite(rabi)) or not np.all(np.isfinite(detunings)):
            raise DomainError("Rabi energies and detunings must be finite")
        if not np.any(np.abs(rabi) > 0):
            raise DomainError("At least one qubit must couple to the cavity")

        if self.positions is not None:
            positions = _frozen_array(self.positions, float)
            if positions.size != rabi.size:
                raise DomainError(f"Got {positions.size} positions for {rabi.size} qubits")
            object.__setattr__(self, "positions", positions)

    @classmethod
    def uniform(cls, count: int, rabi: complex, detuning: float = 0.0) -> "QubitEnsemble":
        """Identical qubits with the same Rabi energy and detuning"""
        if count < 1:
            raise DomainError(f"Qubit count must be positive, got {count}")
        return cls(detunings=np.full(count, detuning), rabi=np.full(count, rabi, dtype=complex))

    @property
    def count(self) -> int:
        return int(self.rabi.size)

    @property
    def collective_rabi(self) -> float:
        """Omega_N = sqrt(sum |Omega_Rj|^2)"""
        return float(np.sqrt(np.sum(np.abs(self.rabi) ** 2)))

    @property
    def is_resonant(self) -> bool:
        return bool(np.all(self.detunings == 0.0))


@dataclass(frozen=True)
class CavitySpec:
    """Lossy cavity mode; the frequency is bookkeeping only"""

    decay: float
    frequency: Optional[float] = None

    def __post_init__(self):
        if not math.isfinite(self.decay) or self.decay < 0:
            raise DomainError(f"Cavity decay must be nonnegative, got {self.decay}")
        if self.frequency is not None and self.frequency <= 0:
            raise DomainError(f"Cavity frequency must be positive, got {self.frequency}")


@dataclass(frozen=True)
class RelaxationSpec:
    """Per-qubit inelastic (gamma_j) and elastic (gamma_el_j) rates in meV"""

    inelastic: np.ndarray
    elastic: np.ndarray

    def __post_init__(self):
        inelastic = _frozen_array(self.inelastic, float)
        elastic = _frozen_array(self.elastic, float)
        if inelastic.size != elastic.size:
            raise DomainError(
                f"Got {inelastic.size} inelastic and {elastic.size} elastic rates"
            )
        if np.any(inelastic < 0) or np.any(elastic < 0):
            raise DomainError("Relaxation rates must be nonnegative")
        object.__setattr__(self, "inelastic", inelastic)
        object.__setattr__(self, "elastic", elastic)

    @classmethod
    def zeros(cls, count: int) -> "RelaxationSpec":
        return cls(inelastic=np.zeros(count), elastic=np.zeros(count))

    @classmethod
    def uniform(cls, count: int, inelastic: float = 0.0, elastic: float = 0.0) -> "RelaxationSpec":
        return cls(inelastic=np.full(count, inelastic), elastic=np.full(count, elastic))

    @property
    def count(self) -> int:
        return int(self.inelastic.size)

    @property
    def t1(self) -> np.ndarray:
        """Population lifetimes T1 = hbar/gamma_j in fs (inf when gamma_j = 0)"""
        with np.errstate(divide="ignore"):
            return np.where(self.inelastic > 0, HBAR / self.inelastic, np.inf)

    @property
    def t2(self) -> np.ndarray:
        """Coherence lifetimes from 1/T2 = 1/(2 T1) + gamma_el, in fs"""
        rate = self.inelastic / 2.0 + self.elastic
        with np.errstate(divide="ignore"):
            return np.where(rate > 0, HBAR / rate, np.inf)


@dataclass(frozen=True)
class SingleExcitationState:
    """Amplitudes of |00>, |10> (photon) and |0j> (qubit j excited)"""

    c00: complex
    c10: complex
    c0: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "c00", complex(self.c00))
        object.__setattr__(self, "c10", complex(self.c10))
        c0 = _frozen_array(self.c0, complex)
        if c0.size < 1:
            raise DomainError("A state needs at least one qubit amplitude")
        object.__setattr__(self, "c0", c0)
        if self.norm > 1.0 + NORM_TOLERANCE:
            raise DomainError(f"State norm {self.norm:.12g} exceeds 1")

    @classmethod
    def ground(cls, count: int) -> "SingleExcitationState":
        return cls(c00=1.0, c10=0.0, c0=np.zeros(count))

    @classmethod
    def photon(cls, count: int) -> "SingleExcitationState":
        return cls(c00=0.0, c10=1.0, c0=np.zeros(count))

    @classmethod
    def qubit_excited(cls, count: int, qubit: int) -> "SingleExcitationState":
        """Qubit `qubit` (1-based) excited, field empty"""
        if qubit < 1 or qubit > count:
            raise DomainError(f"Qubit {qubit} outside 1..{count}")
        c0 = np.zeros(count, dtype=complex)
        c0[qubit - 1] = 1.0
        return cls(c00=0.0, c10=0.0, c0=c0)

    @classmethod
    def bright(cls, rabi: Sequence[complex]) -> "SingleExcitationState":
        """Excitation shared along Omega_Rj / Omega_N, the fully radiating state"""
        rabi = np.asarray(rabi, dtype=complex)
        omega_n = np.sqrt(np.sum(np.abs(rabi) ** 2))
        if omega_n == 0:
            raise DomainError("Bright state needs a nonzero coupling")
        return cls(c00=0.0, c10=0.0, c0=rabi / omega_n)

    @classmethod
    def from_vector(cls, c00: complex, vector: np.ndarray) -> "SingleExcitationState":
        """Build from [c10, c0_1..c0_N]"""
        return cls(c00=c00, c10=vector[0], c0=vector[1:])

    @property
    def count(self) -> int:
        return int(self.c0.size)

    @property
    def vector(self) -> np.ndarray:
        """Excited-manifold amplitudes [c10, c0_1..c0_N]"""
        return np.concatenate(([self.c10], np.asarray(self.c0)))

    @property
    def qubit_population(self) -> float:
        return float(np.sum(np.abs(self.c0) ** 2))

    @property
    def photon_population(self) -> float:
        return float(abs(self.c10) ** 2)

    @property
    def excited_population(self) -> float:
        return self.qubit_population + self.photon_population

    @property
    def norm(self) -> float:
        return float(abs(self.c00) ** 2) + self.excited_population


@dataclass(frozen=True)
class SubsetIndex:
    """Colex rank of a size-p subset of {1..N}"""

    count: int
    size: int
    rank: int

    def __post_init__(self):
        if self.size < 0 or self.size > self.count:
            raise DomainError(f"Subset size {self.size} outside 0..{self.count}")
        if self.rank < 0 or self.rank >= math.comb(self.count, self.size):
            raise DomainError(
                f"Rank {self.rank} outside 0..{math.comb(self.count, self.size) - 1}"
            )

    @property
    def members(self) -> Tuple[int, ...]:
        from darkshield.core.subsets import subset_unrank

        return subset_unrank(self.rank, self.count, self.size)


@dataclass(frozen=True)
class Trajectory:
    """
    Time series of single-excitation amplitudes

    Qubit amplitudes are C_0j of the interaction picture; shape conventions are
    times (T,), c00 (T,), c10 (T,) and c0 (T, N).
    """

    times: np.ndarray
    c00: np.ndarray
    c10: np.ndarray
    c0: np.ndarray
    seed: Optional[int] = field(default=None, compare=False)
    spawn_key: Tuple[int, ...] = field(default=(), compare=False)

    def __post_init__(self):
        times = np.array(self.times, dtype=float).reshape(-1)
        c00 = np.array(self.c00, dtype=complex).reshape(-1)
        c10 = np.array(self.c10, dtype=complex).reshape(-1)
        c0 = np.array(self.c0, dtype=complex)
        if c0.ndim != 2 or c0.shape[0] != times.size:
            raise DomainError(f"Qubit amplitudes of shape {c0.shape} do not match {times.size} times")
        if c00.size != times.size or c10.size != times.size:
            raise DomainError("Amplitude series do not match the time grid")
        for array in (times, c00, c10, c0):
            array.flags.writeable = False
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "c00", c00)
        object.__setattr__(self, "c10", c10)
        object.__setattr__(self, "c0", c0)

    def __len__(self) -> int:
        return int(self.times.size)

    def __getitem__(self, index: int) -> SingleExcitationState:
        return SingleExcitationState(c00=self.c00[index], c10=self.c10[index], c0=self.c0[index])

    def seed_sequence(self) -> Optional[np.random.SeedSequence]:
        """The noise seed of this trajectory alone (None when it was not sampled)"""
        if self.seed is None:
            return None
        return np.random.SeedSequence(self.seed, spawn_key=self.spawn_key)

    @property
    def count(self) -> int:
        return int(self.c0.shape[1])

    @property
    def final(self) -> SingleExcitationState:
        return self[-1]

    @property
    def photon_population(self) -> np.ndarray:
        return np.abs(self.c10) ** 2

    @property
    def qubit_populations(self) -> np.ndarray:
        return np.abs(self.c0) ** 2

    @property
    def total_qubit_population(self) -> np.ndarray:
        return np.sum(np.abs(self.c0) ** 2, axis=1)

    @property
    def norm(self) -> np.ndarray:
        return np.abs(self.c00) ** 2 + self.photon_population + self.total_qubit_population

    def coupling_amplitude(
        self, rabi: Sequence[complex], detunings: Optional[Sequence[float]] = None
    ) -> np.ndarray:
        """
        F(t) = sum_j Omega*_Rj C_0j exp(-i Delta_j t)

        Args:
            rabi: Rabi energies in meV
            detunings: Detunings in meV (resonant when omitted)
        """
        rabi = np.asarray(rabi, dtype=complex)
        amplitudes = self.c0
        if detunings is not None:
            phases = np.exp(-1j * np.outer(self.times, np.asarray(detunings, dtype=float)) / HBAR)
            amplitudes = amplitudes * phases
        return amplitudes @ np.conj(rabi)
