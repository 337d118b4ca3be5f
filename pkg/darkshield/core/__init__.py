"""
Core modules for DarkShield
"""

from darkshield.core.config import Config
from darkshield.core.model import (
    CavitySpec,
    QubitEnsemble,
    RelaxationSpec,
    SingleExcitationState,
    SubsetIndex,
    Trajectory,
)
from darkshield.core.subsets import (
    enumerate_subsets,
    neighbors_down,
    neighbors_up,
    subset_rank,
    subset_unrank,
)

__all__ = [
    "Config",
    "CavitySpec",
    "QubitEnsemble",
    "RelaxationSpec",
    "SingleExcitationState",
    "SubsetIndex",
    "Trajectory",
    "enumerate_subsets",
    "neighbors_down",
    "neighbors_up",
    "subset_rank",
    "subset_unrank",
]
