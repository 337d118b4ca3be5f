"""
Quasistatic substrate field of a sphere-over-plane nanocavity

Lengths are in units of the sphere radius. The sphere centre sits at height
z0 > 1 above a conducting plane; the field on the plane is obtained from the
image-charge ladder inside the sphere and its mirror below the plane. All
fields are returned as dimensionless shapes.
"""

import logging
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from darkshield.core.exceptions import DomainError, GeometryError

logger = logging.getLogger(__name__)

DEFAULT_TERMS = 20
APPROXIMATIONS = ("series", "point", "line")

ArrayLike = Union[float, Sequence[float], np.ndarray]


@dataclass(frozen=True)
class SphereGeometry:
    """Sphere of radius `radius_nm` with centre at z0 radii above the plane"""

    z0: float
    radius_nm: float = 10.0

    def __post_init__(self):
        if not np.isfinite(self.z0) or self.z0 <= 1.0:
            raise GeometryError(f"Sphere centre z0 = {self.z0} must exceed 1 (sphere touches plane)")
        if self.radius_nm <= 0:
            raise GeometryError(f"Sphere radius must be positive, got {self.radius_nm} nm")

    @property
    def alpha(self) -> float:
        """arcosh(z0), written in the logarithmic form that stays accurate near z0 = 1"""
        return float(np.log(self.z0 + np.sqrt(self.z0 ** 2 - 1.0)))

    @property
    def z_inf(self) -> float:
        """Accumulation point of the image charges"""
        return float(np.sqrt(self.z0 ** 2 - 1.0))

    def to_nm(self, rho: ArrayLike) -> np.ndarray:
        return np.asarray(rho, dtype=float) * self.radius_nm


@dataclass(frozen=True)
class ImageChargeSet:
    """Image charges q_n at heights z_n; mirror charges are -q_n at -z_n"""

    charges: np.ndarray
    positions: np.ndarray

    @property
    def mirror_charges(self) -> np.ndarray:
        return -self.charges

    @property
    def mirror_positions(self) -> np.ndarray:
        return -self.positions

    @property
    def total_charge(self) -> float:
        """Q_N"""
        return float(np.sum(self.charges))

    @property
    def centroid(self) -> float:
        """Z_N, the charge-weighted mean height"""
        return float(np.sum(self.charges * self.positions) / np.sum(self.charges))


def _check_terms(n_terms: int) -> None:
    if n_terms < 1:
        raise DomainError(f"Need at least one image charge, got n_terms={n_terms}")


def image_charges(geom: SphereGeometry, n_terms: int = DEFAULT_TERMS) -> ImageChargeSet:
    """
    Closed-form image charges q_n = sinh a / sinh(a(n+1)), z_n = sinh a / tanh(a(n+1))

    sinh(x) is written as e^x (1 - e^{-2x}) / 2 so the ladder stays finite for
    any number of terms.

    Args:
        geom: Sphere geometry
        n_terms: Number of charges

    Returns:
        ImageChargeSet with q_0 = 1 and z_0 = geom.z0

    Raises:
        GeometryError: If z0 <= 1
        DomainError: If n_terms < 1
    """
    _check_terms(n_terms)
    alpha = geom.alpha
    sinh_alpha = np.sqrt(geom.z0 ** 2 - 1.0)

    x = alpha * np.arange(1, n_terms + 1, dtype=float)
    charges = 2.0 * sinh_alpha * np.exp(-x) / (-np.expm1(-2.0 * x))
    positions = sinh_alpha / np.tanh(x)

    # Pin the n = 0 entries to their exact values
    charges[0] = 1.0
    positions[0] = geom.z0

    return ImageChargeSet(charges=charges, positions=positions)


def _point_field(rho: np.ndarray, charges: np.ndarray, heights: np.ndarray) -> np.ndarray:
    """Sum of q z (rho^2 + z^2)^(-3/2) over charges, vectorised over rho"""
    rho2 = rho[..., np.newaxis] ** 2
    return np.sum(charges * heights * (rho2 + heights ** 2) ** -1.5, axis=-1)


def field_series(geom: SphereGeometry, rho: ArrayLike, n_terms: int = DEFAULT_TERMS) -> np.ndarray:
    """
    Image-charge series E_N(rho) for the normal field on the plane

    Each image pair (q_n at z_n, -q_n at -z_n) contributes q_n z_n (rho^2 + z_n^2)^(-3/2),
    which is the sinh/cosh series term by term.

    Args:
        geom: Sphere geometry
        rho: Radial distance(s) on the plane
        n_terms: Number of image pairs

    Returns:
        Field shape, same shape as rho
    """
    ladder = image_charges(geom, n_terms)
    rho = np.asarray(rho, dtype=float)
    return _point_field(rho, ladder.charges, ladder.positions)


def field_point_approx(geom: SphereGeometry, rho: ArrayLike, n_terms: int = DEFAULT_TERMS) -> np.ndarray:
    """Whole ladder collapsed into one charge Q_N at its centroid Z_N"""
    ladder = image_charges(geom, n_terms)
    q_total = ladder.total_charge
    z_mean = ladder.centroid
    rho = np.asarray(rho, dtype=float)
    return q_total * z_mean * (rho ** 2 + z_mean ** 2) ** -1.5


def field_line_approx(geom: SphereGeometry, rho: ArrayLike, n_terms: int = DEFAULT_TERMS) -> np.ndarray:
    """Ladder charge Q_N spread uniformly over the segment [z_inf, z0]"""
    ladder = image_charges(geom, n_terms)
    z0 = geom.z0
    length = z0 - geom.z_inf
    rho = np.asarray(rho, dtype=float)
    bracket = (rho ** 2 + z0 ** 2 - 1.0) ** -0.5 - (rho ** 2 + z0 ** 2) ** -0.5
    return ladder.total_charge / length * bracket


def field_profile(
    geom: SphereGeometry,
    approx: str,
    rho: ArrayLike,
    n_terms: int = DEFAULT_TERMS,
) -> np.ndarray:
    """Dispatch to the series, point or line field"""
    if approx == "series":
        return field_series(geom, rho, n_terms)
    if approx == "point":
        return field_point_approx(geom, rho, n_terms)
    if approx == "line":
        return field_line_approx(geom, rho, n_terms)
    raise DomainError(f"Unknown field approximation {approx!r}; expected one of {APPROXIMATIONS}")


def shifted_line_z0(z0: float) -> float:
    """Centre height z0 + (z0 - z_inf)/2 at which the line field tracks the point field"""
    geom = SphereGeometry(z0)
    return z0 + (z0 - geom.z_inf) / 2.0


def substrate_positions(count: int, rho_max: float = 1.0, rho_min: float = 0.0) -> np.ndarray:
    """Equally spaced radial positions from rho_min to rho_max inclusive"""
    if count < 1:
        raise DomainError(f"Need at least one position, got {count}")
    if rho_max < rho_min or rho_min < 0:
        raise DomainError(f"Invalid radial range [{rho_min}, {rho_max}]")
    if count == 1:
        return np.array([rho_min])
    return np.linspace(rho_min, rho_max, count)


def rabi_profile(
    geom: SphereGeometry,
    approx: str,
    peak_rabi: float,
    rho: ArrayLike,
    n_terms: int = DEFAULT_TERMS,
) -> np.ndarray:
    """
    Rabi energies proportional to the field, calibrated so Omega(0) = peak_rabi

    Args:
        geom: Sphere geometry
        approx: "series", "point" or "line"
        peak_rabi: Rabi energy at rho = 0 in meV
        rho: Qubit radial positions
        n_terms: Number of image charges

    Returns:
        Rabi energies in meV (empty for empty rho)
    """
    if peak_rabi <= 0:
        raise DomainError(f"Peak Rabi energy must be positive, got {peak_rabi}")
    rho = np.asarray(rho, dtype=float).reshape(-1)
    if rho.size == 0:
        return np.zeros(0)
    reference = field_profile(geom, approx, 0.0, n_terms)
    profile = peak_rabi * field_profile(geom, approx, rho, n_terms) / reference
    logger.debug(
        f"Rabi profile ({approx}, z0={geom.z0}) for {rho.size} qubits: "
        f"{profile.max():.3f}..{profile.min():.3f} meV"
    )
    return profile
