"""
Normal-mode analysis of inhomogeneously broadened qubit ensembles

Finite ensembles are propagated exactly through the eigen-decomposition of
the rotating-frame generator. Continuous spectra of transition energies are
described by a SpectralDensity D(Delta) normalised to 2 Delta_m, from which
the strong-broadening (golden-rule) pole and the weak-broadening polariton
parameters follow.
"""

import logging
import warnings
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, linalg, stats

from darkshield.core.exceptions import DomainError, EigenbasisWarning, RegimeWarning
from darkshield.core.model import QubitEnsemble, SingleExcitationState, Trajectory
from darkshield.core.units import HBAR
from darkshield.physics.single_excitation import (
    DEFAULT_ATOL,
    DEFAULT_METHOD,
    DEFAULT_RTOL,
    _as_rabi,
    _ground_amplitude,
    _validate_grid,
    collective_rabi,
    evolve_detuned_numeric,
    excited_generator,
    from_rotating,
    to_rotating,
)

logger = logging.getLogger(__name__)

DEFAULT_CONDITION_LIMIT = 1e12
DEFAULT_DEGENERACY_TOLERANCE = 1e-10
PV_POINTS_PER_HALF_WIDTH = 2000
STRONG_BROADENING_LIMIT = 0.1
WEAK_BROADENING_LIMIT = 10.0


# ----------------------------------------------------------------------
# Finite ensembles
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class NormalModeSet:
    """
    Roots p_0k of the pole condition and the matching eigenvectors

    Roots are energies in meV; C(t) ~ exp(p t / hbar).
    """

    roots: np.ndarray
    eigenvectors: np.ndarray
    mu: float
    weights: Optional[np.ndarray] = None

    @property
    def rates(self) -> np.ndarray:
        """Roots in 1/fs"""
        return self.roots / HBAR

    @property
    def condition(self) -> float:
        return float(np.linalg.cond(self.eigenvectors))

    def mode_weights(self, initial: SingleExcitationState, detunings: Sequence[float]) -> np.ndarray:
        """Residues A_k with C_10(t) = sum_k A_k exp(p_k t / hbar)"""
        detunings = np.asarray(detunings, dtype=float)
        y0 = np.concatenate(([initial.c10], to_rotating(initial.c0[np.newaxis, :], detunings, np.zeros(1))[0]))
        coefficients = np.linalg.solve(self.eigenvectors, y0)
        return self.eigenvectors[0, :] * coefficients


def system_matrix(mu: float, rabi: Sequence[complex], detunings: Sequence[float]) -> np.ndarray:
    """Rotating-frame generator (meV); its eigenvalues are the normal-mode roots"""
    rabi = np.asarray(rabi, dtype=complex).reshape(-1)
    detunings = np.asarray(detunings, dtype=float).reshape(-1)
    if rabi.size != detunings.size or rabi.size < 1:
        raise DomainError(f"Got {rabi.size} Rabi energies and {detunings.size} detunings")
    return excited_generator(mu, rabi, detunings)


def normal_modes(
    mu: float,
    rabi: Sequence[complex],
    detunings: Sequence[float],
    initial: Optional[SingleExcitationState] = None,
) -> NormalModeSet:
    """
    N+1 normal modes of the single-excitation manifold

    Args:
        mu: Cavity decay in meV
        rabi: Rabi energies in meV
        detunings: Detunings in meV
        initial: If given, residue weights A_k are attached

    Returns:
        NormalModeSet sorted by decreasing real part
    """
    generator = system_matrix(mu, rabi, detunings)
    roots, vectors = linalg.eig(generator)
    order = np.lexsort((roots.imag, -roots.real))
    roots = roots[order]
    vectors = vectors[:, order]
    modes = NormalModeSet(roots=roots, eigenvectors=vectors, mu=mu)
    if initial is not None:
        modes = NormalModeSet(
            roots=roots, eigenvectors=vectors, mu=mu,
            weights=modes.mode_weights(initial, detunings),
        )
    logger.debug(f"Normal modes for {roots.size - 1} qubits: max Re p = {roots.real.max():.3e} meV")
    return modes


def _scale(mu: float, rabi: np.ndarray, detunings: np.ndarray) -> float:
    return max(abs(mu), collective_rabi(rabi), float(np.max(np.abs(detunings), initial=0.0)), 1e-300)


def laplace_denominator(
    p: complex,
    mu: float,
    rabi: Sequence[complex],
    detunings: Sequence[float],
) -> complex:
    """
    p + mu/2 + sum_j |Omega_Rj|^2 / (i Delta_j + p), all in meV

    Raises:
        DomainError: If p coincides with a pole -i Delta_j
    """
    rabi = np.asarray(rabi, dtype=complex).reshape(-1)
    detunings = np.asarray(detunings, dtype=float).reshape(-1)
    shifted = 1j * detunings + p
    coupled = np.abs(rabi) > 0
    scale = _scale(mu, rabi, detunings) + abs(p)
    if np.any(np.abs(shifted[coupled]) <= 1e-14 * scale):
        raise DomainError(f"p = {p} coincides with a pole -i Delta_j of the denominator")
    return complex(p + mu / 2.0 + np.sum(np.abs(rabi[coupled]) ** 2 / shifted[coupled]))


def denominator_residual(
    p: complex,
    mu: float,
    rabi: Sequence[complex],
    detunings: Sequence[float],
) -> float:
    """|denominator(p)| relative to the size of its terms"""
    rabi = np.asarray(rabi, dtype=complex).reshape(-1)
    detunings = np.asarray(detunings, dtype=float).reshape(-1)
    value = laplace_denominator(p, mu, rabi, detunings)
    size = abs(p) + mu / 2.0 + np.sum(np.abs(rabi) ** 2 / np.abs(1j * detunings + p))
    return abs(value) / size


def pole_polynomial(mu: float, rabi: Sequence[complex], detunings: Sequence[float]) -> np.ndarray:
    """
    Coefficients (highest power first) of
    (p + mu/2) prod_k (p + i Delta_k) + sum_j |Omega_Rj|^2 prod_{k != j} (p + i Delta_k)

    The polynomial form stays valid when detunings coincide.
    """
    rabi = np.asarray(rabi, dtype=complex).reshape(-1)
    detunings = np.asarray(detunings, dtype=float).reshape(-1)
    roots = -1j * detunings
    coefficients = np.polymul([1.0, mu / 2.0], np.poly(roots))
    for j in range(rabi.size):
        partial = np.poly(np.delete(roots, j)) * abs(rabi[j]) ** 2
        coefficients = np.polyadd(coefficients, partial)
    return coefficients


def _needs_fallback(
    modes: NormalModeSet,
    scale: float,
    condition_limit: float,
    degeneracy_tolerance: float,
) -> Optional[str]:
    condition = modes.condition
    if not np.isfinite(condition) or condition > condition_limit:
        return f"eigenbasis condition number {condition:.3e} exceeds {condition_limit:.1e}"
    roots = modes.roots
    gaps = np.abs(roots[:, np.newaxis] - roots[np.newaxis, :])
    np.fill_diagonal(gaps, np.inf)
    if gaps.min() < degeneracy_tolerance * scale:
        return f"near-degenerate roots (gap {gaps.min():.3e} meV)"
    return None


def eigenmode_evolution(
    initial: SingleExcitationState,
    mu: float,
    rabi: Sequence[complex],
    detunings: Sequence[float],
    t_grid: Sequence[float],
    condition_limit: float = DEFAULT_CONDITION_LIMIT,
    degeneracy_tolerance: float = DEFAULT_DEGENERACY_TOLERANCE,
    method: str = DEFAULT_METHOD,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
) -> Trajectory:
    """
    Exact propagation y(t) = V exp(P t / hbar) V^-1 y(0) in the rotating frame

    Falls back to evolve_detuned_numeric with an EigenbasisWarning when the
    eigenbasis is ill-conditioned or two roots nearly coincide.

    Args:
        initial: State at t_grid[0]
        mu: Cavity decay in meV
        rabi: Rabi energies in meV
        detunings: Detunings in meV
        t_grid: Output times in fs
        condition_limit: Largest acceptable condition number of V
        degeneracy_tolerance: Relative root gap below which V is not trusted
        method, rtol, atol: Integrator settings used by the fall-back

    Returns:
        Trajectory on t_grid
    """
    rabi = _as_rabi(rabi, initial.count)
    detunings = np.asarray(detunings, dtype=float).reshape(-1)
    t_grid = _validate_grid(t_grid)
    modes = normal_modes(mu, rabi, detunings)

    reason = _needs_fallback(modes, _scale(mu, rabi, detunings), condition_limit, degeneracy_tolerance)
    if reason:
        message = f"Eigen-propagation not reliable ({reason}); integrating the ODE instead"
        logger.warning(message)
        warnings.warn(message, EigenbasisWarning, stacklevel=2)
        return evolve_detuned_numeric(
            initial, mu, rabi, detunings, t_grid, method=method, rtol=rtol, atol=atol,
        )

    y0 = np.concatenate(([initial.c10], to_rotating(initial.c0[np.newaxis, :], detunings, t_grid[:1])[0]))
    coefficients = np.linalg.solve(modes.eigenvectors, y0)
    phases = np.exp(np.outer(t_grid - t_grid[0], modes.rates))
    values = (phases * coefficients) @ modes.eigenvectors.T

    c10 = values[:, 0]
    c0 = from_rotating(values[:, 1:], detunings, t_grid)
    excited = np.abs(c10) ** 2 + np.sum(np.abs(c0) ** 2, axis=1)
    return Trajectory(times=t_grid, c00=_ground_amplitude(initial, excited), c10=c10, c0=c0)


def beat_period(count: int, half_width: float) -> float:
    """Beat period pi N hbar / Delta_m (fs) of neighbouring lines in a band of width 2 Delta_m"""
    if count < 1 or half_width <= 0:
        raise DomainError("Beat period needs N >= 1 and Delta_m > 0")
    return np.pi * count * HBAR / half_width


# ----------------------------------------------------------------------
# Continuous spectra
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class SpectralDensity:
    """
    Distribution D(Delta) = |rho(Delta)|^2 f(Delta) of transition energies

    Normalised so that the integral of D over its support is 2 Delta_m.
    """

    half_width: float
    shape: Callable[[np.ndarray], np.ndarray]
    support: Tuple[float, float]
    coupling: Optional[Callable[[np.ndarray], np.ndarray]] = None
    name: str = "custom"
    breakpoints: Tuple[float, ...] = field(default=())

    def __post_init__(self):
        if self.half_width <= 0:
            raise DomainError(f"Half-width must be positive, got {self.half_width}")
        if self.support[1] <= self.support[0]:
            raise DomainError(f"Empty support {self.support}")
        total = self.moment(0)
        if abs(total - 2.0 * self.half_width) > 1e-6 * 2.0 * self.half_width:
            raise DomainError(
                f"Density integrates to {total:.9g}, expected 2 Delta_m = {2 * self.half_width:.9g}"
            )

    def density(self, delta) -> np.ndarray:
        delta = np.asarray(delta, dtype=float)
        inside = (delta >= self.support[0]) & (delta <= self.support[1])
        values = np.where(inside, self.shape(delta), 0.0)
        if self.coupling is not None:
            values = values * np.abs(self.coupling(delta)) ** 2
        return values

    def moment(self, order: int) -> float:
        """Integral of Delta^order D(Delta) over the support"""
        low, high = self.support
        points = [p for p in self.breakpoints if low < p < high] or None
        value, _ = integrate.quad(
            lambda x: x ** order * float(self.density(x)), low, high, points=points, limit=400,
            epsabs=0.0, epsrel=1e-11,
        )
        return float(value)

    def principal_value(self, function: Optional[Callable[[np.ndarray], np.ndarray]] = None) -> float:
        """
        PV integral of g(Delta)/Delta on a grid symmetric about Delta = 0

        Pairs at +-Delta cancel the singular part; the grid spacing is
        Delta_m / 2000. g defaults to D.
        """
        g = self.density if function is None else function
        extent = max(abs(self.support[0]), abs(self.support[1]))
        step = self.half_width / PV_POINTS_PER_HALF_WIDTH
        count = int(np.ceil(extent / step))
        grid = (np.arange(count) + 0.5) * step
        odd = np.asarray(g(grid), dtype=float) - np.asarray(g(-grid), dtype=float)
        return float(np.sum(odd / grid) * step)

    @classmethod
    def gaussian(cls, half_width: float, center: float = 0.0, cutoff: float = 12.0) -> "SpectralDensity":
        """D = (2/sqrt(pi)) exp(-(Delta - center)^2 / Delta_m^2)"""
        return cls(
            half_width=half_width,
            shape=lambda x: 2.0 / np.sqrt(np.pi) * np.exp(-((x - center) / half_width) ** 2),
            support=(center - cutoff * half_width, center + cutoff * half_width),
            name="gaussian",
            breakpoints=(center,),
        )

    @classmethod
    def flat_top(cls, half_width: float) -> "SpectralDensity":
        """D = 1 on [-Delta_m, Delta_m]"""
        return cls(
            half_width=half_width,
            shape=lambda x: np.ones_like(np.asarray(x, dtype=float)),
            support=(-half_width, half_width),
            name="flat-top",
            breakpoints=(0.0,),
        )

    @classmethod
    def from_samples(cls, detunings: Sequence[float], bandwidth: Optional[float] = None) -> "SpectralDensity":
        """Kernel-density estimate of a discrete set of detunings"""
        detunings = np.asarray(detunings, dtype=float)
        if detunings.size < 2:
            raise DomainError("Need at least two detunings for a density estimate")
        kde = stats.gaussian_kde(detunings, bw_method=bandwidth)
        spread = float(np.sqrt(kde.covariance[0, 0]))
        low = detunings.min() - 8.0 * spread
        high = detunings.max() + 8.0 * spread
        half_width = (high - low) / 2.0
        mass, _ = integrate.quad(lambda x: float(kde(x)[0]), low, high, limit=400, epsrel=1e-11)

        def shape(x):
            return 2.0 * half_width * kde(np.atleast_1d(x)).reshape(np.shape(x)) / mass

        return cls(half_width=half_width, shape=shape, support=(low, high), name="sampled")


@dataclass(frozen=True)
class GoldenRuleResult:
    """Single decaying pole of the strong-broadening regime"""

    pole: complex
    regime_ratio: float
    valid: bool

    @property
    def decay_rate(self) -> float:
        """-Re p_0 in meV"""
        return -self.pole.real

    @property
    def shift(self) -> float:
        return self.pole.imag


def _warn_regime(message: str) -> None:
    logger.warning(message)
    warnings.warn(message, RegimeWarning, stacklevel=3)


def golden_rule_pole(mu: float, omega_n: float, density: SpectralDensity) -> GoldenRuleResult:
    """
    p_0 = -mu/2 - (pi Omega_N^2 / 2 Delta_m) D(0) + i (Omega_N^2 / 2 Delta_m) PV int D/Delta

    Valid for Omega_N^2 / (2 Delta_m^2) << 1; a ratio above 0.1 is flagged.
    """
    half_width = density.half_width
    ratio = omega_n ** 2 / (2.0 * half_width ** 2)
    valid = ratio <= STRONG_BROADENING_LIMIT
    if not valid:
        _warn_regime(f"Golden-rule pole outside strong broadening: Omega_N^2/(2 Delta_m^2) = {ratio:.3g}")
    prefactor = omega_n ** 2 / (2.0 * half_width)
    d0 = float(density.density(0.0))
    pole = -mu / 2.0 - np.pi * prefactor * d0 + 1j * prefactor * density.principal_value()
    return GoldenRuleResult(pole=complex(pole), regime_ratio=ratio, valid=valid)


def golden_rule_amplitude(
    c10_initial: complex,
    omega_n: float,
    count: int,
    density: SpectralDensity,
    initial_shape: Optional[Callable[[np.ndarray], np.ndarray]] = None,
) -> complex:
    """
    Prefactor of exp(p_0 t) for C_10 in the strong-broadening regime

    C_10(0) + (sqrt(N) Omega_N / 2 Delta_m) (i pi F(0) + PV int F/Delta), where
    F(Delta) = C_0Delta(0) rho*(Delta) f(Delta) is the initial qubit excitation
    per unit detuning. Without initial qubit excitation this is C_10(0).
    """
    if initial_shape is None:
        return complex(c10_initial)
    prefactor = np.sqrt(count) * omega_n / (2.0 * density.half_width)

    def real_part(x):
        return np.real(initial_shape(x))

    def imag_part(x):
        return np.imag(initial_shape(x))

    pv = density.principal_value(real_part) + 1j * density.principal_value(imag_part)
    f0 = complex(np.asarray(initial_shape(np.array([0.0])))[0])
    return complex(c10_initial + prefactor * (1j * np.pi * f0 + pv))


@dataclass(frozen=True)
class WeakBroadeningParams:
    """
    Polariton parameters for Omega_N >> Delta_m (energies in meV)

    delta_s is the magnitude of the symmetric frequency shift, delta_as the
    asymmetric one, kappa_plus/kappa_minus the amplitude decay rates with
    D evaluated at +Omega_N / -Omega_N.
    """

    omega_n: float
    delta_s: float
    delta_as: float
    kappa_plus: float
    kappa_minus: float
    regime_ratio: float
    valid: bool

    @property
    def upper_frequency(self) -> float:
        """Frequency of the exp(+i w t) component"""
        return self.omega_n + self.delta_s + self.delta_as / 2.0

    @property
    def lower_frequency(self) -> float:
        """Frequency of the exp(-i w t) component"""
        return self.omega_n + self.delta_s - self.delta_as / 2.0

    @property
    def kappa(self) -> float:
        return 0.5 * (self.kappa_plus + self.kappa_minus)


def weak_broadening_params(mu: float, omega_n: float, density: SpectralDensity) -> WeakBroadeningParams:
    """
    delta_s = int Delta^2 D / (4 Delta_m Omega_N), delta_as = -int Delta D / (2 Delta_m),
    kappa_+- = mu/4 + (pi Omega_N^2 / 4 Delta_m) D(+-Omega_N)

    The polariton frequency is pushed up by delta_s. A ratio
    Omega_N^2 / (2 Delta_m^2) below 10 is flagged.
    """
    if omega_n <= 0:
        raise DomainError("Weak-broadening parameters need Omega_N > 0")
    half_width = density.half_width
    ratio = omega_n ** 2 / (2.0 * half_width ** 2)
    valid = ratio >= WEAK_BROADENING_LIMIT
    if not valid:
        _warn_regime(f"Weak-broadening expansion with Omega_N^2/(2 Delta_m^2) = {ratio:.3g} < 10")
    delta_s = density.moment(2) / (4.0 * half_width * omega_n)
    delta_as = -density.moment(1) / (2.0 * half_width)
    absorption = np.pi * omega_n ** 2 / (4.0 * half_width)
    kappa_plus = mu / 4.0 + absorption * float(density.density(omega_n))
    kappa_minus = mu / 4.0 + absorption * float(density.density(-omega_n))
    return WeakBroadeningParams(
        omega_n=omega_n, delta_s=delta_s, delta_as=delta_as,
        kappa_plus=kappa_plus, kappa_minus=kappa_minus,
        regime_ratio=ratio, valid=valid,
    )


@dataclass(frozen=True)
class EnvelopeResult:
    times: np.ndarray
    c10: np.ndarray
    c0: Optional[np.ndarray] = None


def _integrated_exponential(rate: np.ndarray, times: np.ndarray) -> np.ndarray:
    """(exp(s t) - 1) / s with the limit t at s = 0; shapes broadcast to (T, N)"""
    product = np.outer(times, np.ones_like(rate)) * rate
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.expm1(product) / rate
    small = np.abs(product) < 1e-12
    return np.where(small, np.outer(times, np.ones_like(rate)) * (1 + product / 2), ratio)


def continuous_envelope(
    c10_initial: complex,
    f_initial: complex,
    params: WeakBroadeningParams,
    t: Sequence[float],
    rabi: Optional[Sequence[complex]] = None,
    detunings: Optional[Sequence[float]] = None,
    c0_initial: Optional[Sequence[complex]] = None,
) -> EnvelopeResult:
    """
    Weak-broadening polariton envelope

    C_10(t) = (C_10(0) cos w t + i F(0)/Omega_N sin w t) exp(-kappa t) with
    w = Omega_N + delta_s for a symmetric density; an asymmetric density
    splits it into its two components. When rabi and detunings are given,
    C_0j(t) = C_0j(0) + i Omega_Rj int_0^t C_10 exp(i Delta_j t') dt' is
    integrated in closed form.

    Args:
        c10_initial: C_10(0)
        f_initial: F(0) = sum_j Omega*_Rj C_0j(0)
        params: Output of weak_broadening_params
        t: Times in fs
        rabi, detunings, c0_initial: Optional per-qubit data for C_0j(t)
    """
    times = np.asarray(t, dtype=float).reshape(-1)
    ratio = f_initial / params.omega_n
    upper = (c10_initial + ratio) / 2.0
    lower = (c10_initial - ratio) / 2.0
    s_upper = (1j * params.upper_frequency - params.kappa_minus) / HBAR
    s_lower = (-1j * params.lower_frequency - params.kappa_plus) / HBAR
    c10 = upper * np.exp(s_upper * times) + lower * np.exp(s_lower * times)

    c0 = None
    if rabi is not None and detunings is not None:
        rabi = np.asarray(rabi, dtype=complex).reshape(-1)
        detunings = np.asarray(detunings, dtype=float).reshape(-1)
        start = np.zeros(rabi.size, dtype=complex) if c0_initial is None else np.asarray(c0_initial, dtype=complex)
        shift = 1j * detunings / HBAR
        accumulated = (
            upper * _integrated_exponential(s_upper + shift, times)
            + lower * _integrated_exponential(s_lower + shift, times)
        )
        c0 = start[np.newaxis, :] + 1j * rabi[np.newaxis, :] * accumulated / HBAR
    return EnvelopeResult(times=times, c10=c10, c0=c0)


# ----------------------------------------------------------------------
# Regimes and band structures
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class RegimeReport:
    """Dimensionless ratios that decide which approximation applies"""

    inhomogeneous_dominance: float
    broadening_ratio: float
    continuum_ratio: float
    transfer_ratio: float

    @property
    def regime(self) -> str:
        if self.broadening_ratio <= STRONG_BROADENING_LIMIT:
            return "strong-broadening"
        if self.broadening_ratio >= WEAK_BROADENING_LIMIT:
            return "weak-broadening"
        return "intermediate"

    @property
    def cavity_loss_faster_than_transfer(self) -> bool:
        return self.inhomogeneous_dominance > self.transfer_ratio

    def as_dict(self) -> Dict[str, float]:
        return {
            "inhomogeneous_dominance": self.inhomogeneous_dominance,
            "broadening_ratio": self.broadening_ratio,
            "continuum_ratio": self.continuum_ratio,
            "transfer_ratio": self.transfer_ratio,
            "regime": self.regime,
        }


def regime_report(mu: float, omega_n: float, half_width: float, count: int) -> RegimeReport:
    """
    Ratios mu/(4 Delta_m), Omega_N^2/(2 Delta_m^2), pi N Omega_N^2/(4 Delta_m^2)
    (golden-rule rate over line spacing) and pi Omega_N^2/(4 Delta_m^2)
    """
    if half_width <= 0:
        raise DomainError("Regime report needs Delta_m > 0")
    return RegimeReport(
        inhomogeneous_dominance=mu / (4.0 * half_width),
        broadening_ratio=omega_n ** 2 / (2.0 * half_width ** 2),
        continuum_ratio=np.pi * count * omega_n ** 2 / (4.0 * half_width ** 2),
        transfer_ratio=np.pi * omega_n ** 2 / (4.0 * half_width ** 2),
    )


@dataclass(frozen=True)
class BandSystem:
    """Conduction levels W_j, valence levels W_alpha and dipole couplings (meV)"""

    conduction: np.ndarray
    valence: np.ndarray
    dipoles: np.ndarray

    def __post_init__(self):
        conduction = np.asarray(self.conduction, dtype=float).reshape(-1)
        valence = np.asarray(self.valence, dtype=float).reshape(-1)
        dipoles = np.asarray(self.dipoles, dtype=complex)
        if dipoles.shape != (conduction.size, valence.size):
            raise DomainError(
                f"Dipole matrix shape {dipoles.shape} does not match "
                f"{conduction.size} x {valence.size} levels"
            )
        object.__setattr__(self, "conduction", conduction)
        object.__setattr__(self, "valence", valence)
        object.__setattr__(self, "dipoles", dipoles)

    @property
    def transition_energies(self) -> np.ndarray:
        """W_j - W_alpha for every pair, shape (J, A)"""
        return self.conduction[:, np.newaxis] - self.valence[np.newaxis, :]


def flatten_band_transitions(
    band: BandSystem,
    cavity_energy: float,
    spin_degenerate: bool = False,
) -> QubitEnsemble:
    """
    One pseudo-qubit per allowed (j, alpha) pair, ordered j-major

    Delta_s = (W_j - W_alpha) - hbar omega and Omega_s = Omega_R;j,alpha;
    pairs with zero dipole are dropped. With spin_degenerate every pair is
    listed twice.
    """
    energies = band.transition_energies.reshape(-1)
    dipoles = band.dipoles.reshape(-1)
    allowed = np.abs(dipoles) > 0
    detunings = energies[allowed] - cavity_energy
    rabi = dipoles[allowed]
    if spin_degenerate:
        detunings = np.repeat(detunings, 2)
        rabi = np.repeat(rabi, 2)
    logger.debug(f"Flattened {allowed.sum()} allowed transitions into pseudo-qubits")
    return QubitEnsemble(detunings=detunings, rabi=rabi)
