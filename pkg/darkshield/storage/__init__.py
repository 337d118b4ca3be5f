"""
Artifact storage for DarkShield
"""

from darkshield.storage.artifacts import ArtifactStore, parameters_hash, write_csv

__all__ = [
    "ArtifactStore",
    "parameters_hash",
    "write_csv",
]
