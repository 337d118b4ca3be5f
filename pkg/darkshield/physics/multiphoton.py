"""
Fixed-M excitation blocks for equally coupled resonant qubits

A block holds every state with n photons and a subset alpha of p = M - n
excited qubits. Amplitudes are ordered by photon number n, then by the colex
rank of alpha. The highest block is evolved without noise:

    hbar dC_{n,alpha}/dt = -n mu/2 C_{n,alpha}
        + i [Omega sqrt(n+1) sum_{j in alpha} C_{n+1, alpha-j}
             + Omega* sqrt(n) sum_{j not in alpha} C_{n-1, alpha+j}]
"""

import logging
import math
import warnings
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg, sparse
from scipy.integrate import solve_ivp

from darkshield.core.exceptions import (
    BasisTooLargeError,
    DomainError,
    IntegrationError,
    PreconditionError,
    RegimeWarning,
)
from darkshield.core.model import SubsetIndex
from darkshield.core.subsets import enumerate_subsets, subset_rank
from darkshield.core.units import HBAR
from darkshield.physics.single_excitation import DEFAULT_ATOL, DEFAULT_METHOD, DEFAULT_RTOL

logger = logging.getLogger(__name__)

BASIS_LIMIT = 100_000
RANK_TOLERANCE = 1e-10
PRESETS = ("pair-excited", "symmetric", "antisymmetric", "disjoint-uniform")


def _layer_range(count: int, total: int) -> range:
    """Photon numbers present in the block"""
    return range(max(0, total - count), total + 1)


def block_size(count: int, total: int) -> int:
    """sum_p comb(N, p) over the layers of the block"""
    return sum(math.comb(count, total - n) for n in _layer_range(count, total))


@dataclass(frozen=True)
class MultiphotonBlock:
    """
    Basis and amplitudes of the block n + p = M

    Attributes:
        count: Number of qubits N
        total: Excitation number M
        amplitudes: Complex amplitudes aligned with basis()
    """

    count: int
    total: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.count < 1:
            raise DomainError(f"Need at least one qubit, got {self.count}")
        if self.total < 0:
            raise DomainError(f"Excitation number must be nonnegative, got {self.total}")
        amplitudes = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amplitudes.size != block_size(self.count, self.total):
            raise DomainError(
                f"{amplitudes.size} amplitudes for a block of size {block_size(self.count, self.total)}"
            )
        amplitudes.flags.writeable = False
        object.__setattr__(self, "amplitudes", amplitudes)

    @classmethod
    def zeros(cls, count: int, total: int) -> "MultiphotonBlock":
        size = block_size(count, total)
        if size > BASIS_LIMIT:
            raise BasisTooLargeError(
                f"Block N={count}, M={total} has {size} states (limit {BASIS_LIMIT})",
                details={"count": count, "total": total, "size": size},
            )
        return cls(count=count, total=total, amplitudes=np.zeros(size, dtype=complex))

    @classmethod
    def from_amplitudes(
        cls,
        count: int,
        total: int,
        amplitudes: Mapping[Tuple[int, Iterable[int]], complex],
    ) -> "MultiphotonBlock":
        """
        Build from {(n, members): amplitude}

        Raises:
            DomainError: If an entry does not satisfy n + |members| = M
        """
        block = cls.zeros(count, total)
        values = np.zeros(block.size, dtype=complex)
        for (photons, members), value in amplitudes.items():
            members = tuple(members)
            if photons + len(members) != total:
                raise DomainError(f"State ({photons}, {members}) is not in block M={total}")
            values[block.index(photons, members)] = value
        return block.with_amplitudes(values)

    @property
    def size(self) -> int:
        return int(self.amplitudes.size)

    @property
    def layers(self) -> range:
        return _layer_range(self.count, self.total)

    def offset(self, photons: int) -> int:
        """Position of the first state with the given photon number"""
        if photons not in self.layers:
            raise DomainError(f"No layer with n={photons} in block N={self.count}, M={self.total}")
        return sum(math.comb(self.count, self.total - n) for n in range(self.layers.start, photons))

    def layer_slice(self, photons: int) -> slice:
        start = self.offset(photons)
        return slice(start, start + math.comb(self.count, self.total - photons))

    def index(self, photons: int, members: Iterable[int]) -> int:
        return self.offset(photons) + subset_rank(members, self.count).rank

    def basis(self) -> List[Tuple[int, SubsetIndex]]:
        """(n, subset) pairs in amplitude order"""
        states = []
        for photons in self.layers:
            size = self.total - photons
            for rank in range(math.comb(self.count, size)):
                states.append((photons, SubsetIndex(count=self.count, size=size, rank=rank)))
        return states

    def with_amplitudes(self, amplitudes: np.ndarray) -> "MultiphotonBlock":
        return MultiphotonBlock(count=self.count, total=self.total, amplitudes=amplitudes)

    def layer_populations(self) -> np.ndarray:
        """sum |C|^2 per photon number n = 0..M (zero for absent layers)"""
        return _layer_sums(self, np.abs(self.amplitudes[np.newaxis, :]) ** 2)[0].real

    def reduced_state(self) -> "ReducedFState":
        """F_n = sum over subsets of C_{n, alpha}"""
        return ReducedFState(_layer_sums(self, self.amplitudes[np.newaxis, :])[0])

    @property
    def norm(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    def permuted(self, permutation: Sequence[int]) -> "MultiphotonBlock":
        """
        Relabel qubits: qubit j becomes permutation[j - 1] (1-based labels)
        """
        permutation = [int(p) for p in permutation]
        if sorted(permutation) != list(range(1, self.count + 1)):
            raise DomainError(f"{permutation} is not a permutation of 1..{self.count}")
        values = np.zeros(self.size, dtype=complex)
        for position, (photons, subset) in enumerate(self.basis()):
            image = [permutation[m - 1] for m in subset.members]
            values[self.index(photons, image)] = self.amplitudes[position]
        return self.with_amplitudes(values)


@dataclass(frozen=True)
class ReducedFState:
    """F_n for n = 0..M"""

    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=complex).reshape(-1)
        if values.size < 1:
            raise DomainError("Reduced state needs at least F_0")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def total(self) -> int:
        return int(self.values.size - 1)


def _layer_sums(block: MultiphotonBlock, values: np.ndarray) -> np.ndarray:
    """Sum (T, size) values over each layer into (T, M + 1)"""
    sums = np.zeros((values.shape[0], block.total + 1), dtype=values.dtype)
    for photons in block.layers:
        sums[:, photons] = values[:, block.layer_slice(photons)].sum(axis=1)
    return sums


def build_block(count: int, total: int) -> MultiphotonBlock:
    """
    Complete basis of the block with zero amplitudes

    Raises:
        BasisTooLargeError: If the block has more than 10^5 states
    """
    block = MultiphotonBlock.zeros(count, total)
    logger.debug(f"Block N={count}, M={total}: {block.size} states in {len(block.layers)} layers")
    return block


def preset_block(name: str, count: int, total: int) -> MultiphotonBlock:
    """
    Named initial states, all in the p = M layer

    pair-excited: qubits 1..M excited
    symmetric: uniform superposition of all M-subsets
    antisymmetric: (|{1,4}> - |{2,3}>)/sqrt(2), M = 2 and N >= 4
    disjoint-uniform: uniform superposition of {1..M}, {M+1..2M}, ...
    """
    block = build_block(count, total)
    if total > count:
        raise DomainError(f"Preset '{name}' needs M <= N, got M={total}, N={count}")
    values = np.zeros(block.size, dtype=complex)
    top = block.layer_slice(0)

    if name == "pair-excited":
        values[block.index(0, range(1, total + 1))] = 1.0
    elif name == "symmetric":
        values[top] = 1.0 / np.sqrt(top.stop - top.start)
    elif name == "antisymmetric":
        if total != 2 or count < 4:
            raise PreconditionError("The antisymmetric preset is defined for M = 2 and N >= 4")
        values[block.index(0, (1, 4))] = 1.0 / np.sqrt(2.0)
        values[block.index(0, (2, 3))] = -1.0 / np.sqrt(2.0)
    elif name == "disjoint-uniform":
        groups = _disjoint_groups(count, total)
        for members in groups:
            values[block.index(0, members)] = 1.0 / np.sqrt(len(groups))
    else:
        raise DomainError(f"Unknown block preset '{name}'; available: {', '.join(PRESETS)}")
    return block.with_amplitudes(values)


def _disjoint_groups(count: int, total: int) -> List[Tuple[int, ...]]:
    if total < 1 or count % total != 0:
        raise DomainError(f"L = N/M must be an integer, got N={count}, M={total}")
    return [tuple(range(k * total + 1, (k + 1) * total + 1)) for k in range(count // total)]


def block_generator(block: MultiphotonBlock, rabi: complex, mu: float) -> sparse.csr_matrix:
    """Sparse generator in meV, hbar dC/dt = G C"""
    rows: List[int] = []
    cols: List[int] = []
    data: List[complex] = []
    diagonal = np.zeros(block.size)
    for photons in block.layers:
        diagonal[block.layer_slice(photons)] = -photons * mu / 2.0
        size = block.total - photons
        if size == 0 or photons + 1 not in block.layers:
            continue
        strength = np.sqrt(photons + 1.0)
        for position, members in enumerate(enumerate_subsets(block.count, size)):
            upper = block.offset(photons) + position
            for j in members:
                lower = block.index(photons + 1, (m for m in members if m != j))
                rows += [upper, lower]
                cols += [lower, upper]
                data += [1j * rabi * strength, 1j * np.conj(rabi) * strength]
    coupling = sparse.coo_matrix((data, (rows, cols)), shape=(block.size, block.size), dtype=complex)
    return (coupling + sparse.diags(diagonal.astype(complex))).tocsr()


@dataclass(frozen=True)
class BlockTrajectory:
    """Amplitudes of one block on a time grid, shape (T, size)"""

    times: np.ndarray
    amplitudes: np.ndarray
    count: int
    total: int

    def __getitem__(self, index: int) -> MultiphotonBlock:
        return MultiphotonBlock(count=self.count, total=self.total, amplitudes=self.amplitudes[index])

    @property
    def final(self) -> MultiphotonBlock:
        return self[-1]

    @property
    def norm(self) -> np.ndarray:
        return np.sum(np.abs(self.amplitudes) ** 2, axis=1)

    def layer_populations(self) -> np.ndarray:
        """(T, M + 1) populations per photon number"""
        return _layer_sums(self[0], np.abs(self.amplitudes) ** 2).real

    def reduced(self) -> np.ndarray:
        """(T, M + 1) F_n by subset summation"""
        return _layer_sums(self[0], self.amplitudes)

    def photon_weight(self) -> np.ndarray:
        """sum_n n |C_n|^2, the quantity drained at rate mu"""
        return self.layer_populations() @ np.arange(self.total + 1)


def _integrate(rates, y0: np.ndarray, t_grid: np.ndarray, method: str, rtol: float, atol: float) -> np.ndarray:
    if t_grid.size == 1:
        return y0[np.newaxis, :]
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
        logger.error(f"Block integration failed: {solution.message}")
        raise IntegrationError(f"Block integration failed: {solution.message}", diagnostics)
    logger.debug(f"Block integration finished after {solution.nfev} evaluations")
    return solution.y.T


def _grid(t_grid: Sequence[float]) -> np.ndarray:
    t_grid = np.asarray(t_grid, dtype=float).reshape(-1)
    if t_grid.size == 0 or np.any(np.diff(t_grid) <= 0):
        raise DomainError("Time grid must be nonempty and strictly increasing")
    return t_grid


def evolve_block(
    block: MultiphotonBlock,
    rabi: complex,
    mu: float,
    t_grid: Sequence[float],
    method: str = DEFAULT_METHOD,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
) -> BlockTrajectory:
    """
    Integrate one block for equal couplings on resonance

    Args:
        block: Initial amplitudes at t_grid[0]
        rabi: Common Rabi energy in meV
        mu: Cavity decay in meV
        t_grid: Output times in fs

    Returns:
        BlockTrajectory on t_grid
    """
    t_grid = _grid(t_grid)
    rates = block_generator(block, rabi, mu) / HBAR
    amplitudes = _integrate(rates, np.asarray(block.amplitudes), t_grid, method, rtol, atol)
    return BlockTrajectory(times=t_grid, amplitudes=amplitudes, count=block.count, total=block.total)


def reduced_generator(count: int, total: int, rabi: complex, mu: float) -> np.ndarray:
    """
    Generator (meV) of F_n, n = 0..M:
    (d/dt + n mu/2) F_n = i [Omega sqrt(n+1)(N-M+n+1) F_{n+1} + Omega* sqrt(n)(M-n+1) F_{n-1}]

    Rows of layers absent from the block (p > N) are left zero.
    """
    if count < 1 or total < 0:
        raise DomainError(f"Invalid block N={count}, M={total}")
    present = _layer_range(count, total)
    generator = np.zeros((total + 1, total + 1), dtype=complex)
    for n in present:
        generator[n, n] = -n * mu / 2.0
        if n + 1 in present:
            generator[n, n + 1] = 1j * rabi * np.sqrt(n + 1.0) * (count - total + n + 1)
        if n - 1 in present:
            generator[n, n - 1] = 1j * np.conj(rabi) * np.sqrt(float(n)) * (total - n + 1)
    return generator


def reduced_Fn_evolve(
    initial: ReducedFState,
    rabi: complex,
    mu: float,
    count: int,
    total: int,
    t_grid: Sequence[float],
    method: str = DEFAULT_METHOD,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
) -> np.ndarray:
    """
    Integrate the closed F_n equations

    Returns:
        (T, M + 1) array of F_n(t)
    """
    if initial.total != total:
        raise DomainError(f"Reduced state has M={initial.total}, expected {total}")
    t_grid = _grid(t_grid)
    rates = reduced_generator(count, total, rabi, mu) / HBAR
    return _integrate(rates, np.asarray(initial.values), t_grid, method, rtol, atol)


def block_eigenvalues(count: int, total: int, rabi: complex, mu: float) -> np.ndarray:
    """Eigenvalues (meV) of the reduced generator restricted to the layers present"""
    present = list(_layer_range(count, total))
    generator = reduced_generator(count, total, rabi, mu)[np.ix_(present, present)]
    return linalg.eigvals(generator)


def m2_polynomial(count: int, rabi: complex, mu: float) -> np.ndarray:
    """
    Coefficients of G (G + mu/2)(G + mu) + 2(2N - 1)|Omega|^2 G + 2(N - 1)|Omega|^2 mu
    """
    rabi2 = abs(rabi) ** 2
    return np.array([
        1.0,
        1.5 * mu,
        mu ** 2 / 2.0 + 2.0 * (2 * count - 1) * rabi2,
        2.0 * (count - 1) * rabi2 * mu,
    ])


def block_eigenvalues_M2(count: int, rabi: complex, mu: float) -> np.ndarray:
    """Three roots (meV) of the M = 2 characteristic cubic, sorted by imaginary part"""
    if count < 2:
        raise DomainError(f"The M = 2 cubic needs N >= 2, got {count}")
    roots = np.roots(m2_polynomial(count, rabi, mu)).astype(complex)
    return roots[np.argsort(roots.imag)]


def antisymmetric_pair_roots(rabi: complex, mu: float) -> np.ndarray:
    """-mu/4 +- i sqrt(2|Omega|^2 - mu^2/16) for the antisymmetric N = 4 pair state"""
    root = np.sqrt(complex(2.0 * abs(rabi) ** 2 - mu ** 2 / 16.0))
    return np.array([-mu / 4.0 - 1j * root, -mu / 4.0 + 1j * root])


def inclusion_matrix(count: int, total: int) -> np.ndarray:
    """Row per (M-1)-subset beta, 1 where the M-subset alpha contains beta"""
    rows = math.comb(count, total - 1) if total >= 1 else 0
    cols = math.comb(count, total)
    matrix = np.zeros((rows, cols))
    for col, members in enumerate(enumerate_subsets(count, total)):
        for j in members:
            matrix[subset_rank((m for m in members if m != j), count).rank, col] = 1.0
    return matrix


def dark_subspace(count: int, total: int) -> np.ndarray:
    """
    Orthonormal basis of dark vectors in the p = M layer, shape (comb(N, M), d)

    Dark vectors satisfy sum_{alpha > beta} C_alpha = 0 for every (M-1)-subset
    beta. Blocks with N < 2M have none; an empty basis is returned with a
    RegimeWarning.
    """
    if total < 0 or total > count:
        raise DomainError(f"Need 0 <= M <= N, got M={total}, N={count}")
    if math.comb(count, total) > BASIS_LIMIT:
        raise BasisTooLargeError(f"comb({count}, {total}) exceeds {BASIS_LIMIT}")
    if total == 0:
        return np.ones((1, 1), dtype=complex)
    if count < 2 * total:
        message = f"No dark states for N={count} < 2M={2 * total}"
        logger.info(message)
        warnings.warn(message, RegimeWarning, stacklevel=2)
        return np.zeros((math.comb(count, total), 0), dtype=complex)
    basis = linalg.null_space(inclusion_matrix(count, total), rcond=RANK_TOLERANCE)
    logger.debug(f"Dark subspace N={count}, M={total}: dimension {basis.shape[1]}")
    return basis.astype(complex)


@dataclass(frozen=True)
class BrightDarkSplit:
    dark: MultiphotonBlock
    bright: MultiphotonBlock
    retained_fraction: float


def decompose_bright_dark(block: MultiphotonBlock) -> BrightDarkSplit:
    """
    Orthogonal projection of a p = M state onto the dark subspace

    The retained fraction is the squared norm of the dark part, the
    population that survives once the bright remainder has radiated.

    Raises:
        PreconditionError: If any photonic layer is populated
    """
    top = block.layer_slice(0) if 0 in block.layers else None
    if top is None:
        raise PreconditionError(f"Block N={block.count}, M={block.total} has no p=M layer")
    outside = np.delete(np.asarray(block.amplitudes), np.arange(top.start, top.stop))
    if np.any(np.abs(outside) > 0):
        raise PreconditionError("Bright/dark decomposition needs amplitudes only at n = 0, p = M")

    basis = dark_subspace(block.count, block.total)
    amplitudes = np.asarray(block.amplitudes)
    dark = np.zeros(block.size, dtype=complex)
    dark[top] = basis @ (basis.conj().T @ amplitudes[top])
    bright = amplitudes - dark
    retained = float(np.sum(np.abs(dark) ** 2))
    logger.debug(f"Retained fraction {retained:.6f}")
    return BrightDarkSplit(
        dark=block.with_amplitudes(dark),
        bright=block.with_amplitudes(bright),
        retained_fraction=retained,
    )


@dataclass(frozen=True)
class DisjointAsymptotics:
    """Asymptotic amplitudes of the disjoint-uniform state"""

    amplitude_in: float
    amplitude_out: float
    groups: int
    others: int

    @property
    def retained_fraction(self) -> float:
        return self.amplitude_in ** 2 * self.groups + self.amplitude_out ** 2 * self.others


def disjoint_uniform_asymptotics(count: int, total: int) -> DisjointAsymptotics:
    """
    (1/sqrt(L))(N-M)/(N-M+1) on the L initially excited disjoint subsets and
    -(1/sqrt(L))/(N-M+1) on every other M-subset

    The closed form is exact for pairs (M = 2) and for M = N; other M are
    flagged with a RegimeWarning.

    Raises:
        DomainError: If L = N/M is not an integer
    """
    groups = len(_disjoint_groups(count, total))
    if total not in (2, count):
        message = f"Disjoint-uniform closed form is exact only for M = 2 or M = N, got M={total}"
        logger.warning(message)
        warnings.warn(message, RegimeWarning, stacklevel=2)
    scale = 1.0 / np.sqrt(groups)
    spread = count - total + 1
    return DisjointAsymptotics(
        amplitude_in=scale * (count - total) / spread,
        amplitude_out=-scale / spread,
        groups=groups,
        others=math.comb(count, total) - groups,
    )


def dark_population(trajectory: BlockTrajectory, basis: Optional[np.ndarray] = None) -> np.ndarray:
    """Population of the dark subspace along a block trajectory"""
    block = trajectory[0]
    if basis is None:
        basis = dark_subspace(block.count, block.total)
    top = trajectory.amplitudes[:, block.layer_slice(0)]
    return np.sum(np.abs(top @ basis.conj()) ** 2, axis=1)


def summarize_block(trajectory: BlockTrajectory) -> Dict[str, float]:
    """Final layer populations and total norm, for tabular output"""
    final = trajectory.final
    populations = final.layer_populations()
    summary = {f"n{n}": float(populations[n]) for n in range(final.total + 1)}
    summary["norm"] = final.norm
    return summary
