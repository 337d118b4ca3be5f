"""
Numerical models for DarkShield
"""

from darkshield.physics.field import (
    SphereGeometry,
    field_line_approx,
    field_point_approx,
    field_profile,
    field_series,
    image_charges,
    rabi_profile,
    substrate_positions,
)
from darkshield.physics.inhomogeneous import (
    SpectralDensity,
    continuous_envelope,
    eigenmode_evolution,
    golden_rule_pole,
    laplace_denominator,
    normal_modes,
    weak_broadening_params,
)
from darkshield.physics.multiphoton import (
    MultiphotonBlock,
    block_eigenvalues_M2,
    dark_subspace,
    decompose_bright_dark,
    evolve_block,
    reduced_Fn_evolve,
)
from darkshield.physics.single_excitation import (
    asymptotic_state,
    bright_dark_decompose,
    evolve_detuned_numeric,
    evolve_resonant_analytic,
)
from darkshield.physics.spectrum import correlator_analytic, spectrum_analytic, spectrum_numeric
from darkshield.physics.stochastic import SSESpec, ensemble_average, sse_trajectory

__all__ = [
    "MultiphotonBlock",
    "SSESpec",
    "SpectralDensity",
    "SphereGeometry",
    "asymptotic_state",
    "block_eigenvalues_M2",
    "bright_dark_decompose",
    "continuous_envelope",
    "correlator_analytic",
    "dark_subspace",
    "decompose_bright_dark",
    "eigenmode_evolution",
    "ensemble_average",
    "evolve_block",
    "evolve_detuned_numeric",
    "evolve_resonant_analytic",
    "field_line_approx",
    "field_point_approx",
    "field_profile",
    "field_series",
    "golden_rule_pole",
    "image_charges",
    "laplace_denominator",
    "normal_modes",
    "rabi_profile",
    "reduced_Fn_evolve",
    "spectrum_analytic",
    "spectrum_numeric",
    "sse_trajectory",
    "substrate_positions",
    "weak_broadening_params",
]
