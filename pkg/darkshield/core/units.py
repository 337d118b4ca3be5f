"""
Unit handling for DarkShield

Energies are carried in meV and times in fs throughout the package. A rate
quoted as an energy E corresponds to E / HBAR per fs.
"""

import re
from typing import Optional, Union

from darkshield.core.exceptions import DomainError

HBAR = 658.2119569  # meV * fs

ENERGY_UNITS = {
    "uev": 1e-3,
    "mev": 1.0,
    "ev": 1e3,
}

TIME_UNITS = {
    "fs": 1.0,
    "ps": 1e3,
    "ns": 1e6,
}

_QUANTITY_PATTERN = re.compile(r"^\s*([-+0-9.eE]+)\s*([A-Za-z/µ]*)\s*$")


def energy_to_rate(energy: float) -> float:
    """Convert an energy in meV to a rate in 1/fs"""
    return energy / HBAR


def rate_to_energy(rate: float) -> float:
    """Convert a rate in 1/fs to an energy in meV"""
    return rate * HBAR


def lifetime_to_energy(lifetime: float) -> float:
    """Convert a lifetime 1/mu in fs to the decay energy mu in meV"""
    if lifetime <= 0:
        raise DomainError(f"Lifetime must be positive, got {lifetime}")
    return HBAR / lifetime


def energy_to_lifetime(energy: float) -> float:
    """Convert a decay energy in meV to its lifetime in fs"""
    if energy <= 0:
        raise DomainError(f"Decay energy must be positive, got {energy}")
    return HBAR / energy


def parse_quantity(
    value: Union[str, int, float],
    kind: str,
    decay: Optional[float] = None,
) -> float:
    """
    Parse a quantity such as "120 meV", "20 fs" or "25 /mu"

    Args:
        value: Number (canonical unit assumed) or string with unit suffix
        kind: "energy" (result in meV) or "time" (result in fs)
        decay: Cavity decay energy in meV, needed for the "/mu" time unit

    Returns:
        Value in meV or fs

    Raises:
        DomainError: If the text cannot be parsed or the unit does not fit
    """
    if isinstance(value, bool):
        raise DomainError(f"Expected a {kind} quantity, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)

    match = _QUANTITY_PATTERN.match(str(value))
    if not match:
        raise DomainError(f"Cannot parse {kind} quantity {value!r}")

    try:
        number = float(match.group(1))
    except ValueError as e:
        raise DomainError(f"Cannot parse {kind} quantity {value!r}") from e

    unit = match.group(2).lower().replace("µ", "u")

    if kind == "energy":
        if not unit:
            return number
        if unit in ENERGY_UNITS:
            return number * ENERGY_UNITS[unit]
        raise DomainError(f"Unknown energy unit {match.group(2)!r} in {value!r}")

    if kind == "time":
        if not unit:
            return number
        if unit in TIME_UNITS:
            return number * TIME_UNITS[unit]
        if unit == "/mu":
            if decay is None or decay <= 0:
                raise DomainError(f"Time {value!r} given in 1/mu but no cavity decay is known")
            return number * energy_to_lifetime(decay)
        raise DomainError(f"Unknown time unit {match.group(2)!r} in {value!r}")

    raise DomainError(f"Unknown quantity kind {kind!r}")
