"""
DarkShield - dark-state shielding of qubit ensembles in lossy nanocavities
"""

__version__ = "0.1.0"
__author__ = "Tiziano Angeli"
__license__ = "GPL-3.0"

from darkshield.core.config import Config
from darkshield.core.model import (
    CavitySpec,
    QubitEnsemble,
    RelaxationSpec,
    SingleExcitationState,
    Trajectory,
)

__all__ = [
    "Config",
    "CavitySpec",
    "QubitEnsemble",
    "RelaxationSpec",
    "SingleExcitationState",
    "Trajectory",
]
