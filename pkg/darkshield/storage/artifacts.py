"""
Local artifact store for DarkShield runs

Every run writes into its own directory: CSV tables with a commented header,
JSON summaries and a manifest.json carrying parameters, seed, library
version, host facts and SHA-256 checksums of every file.
"""

import csv
import hashlib
import json
import logging
import platform
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence

import numpy as np
import psutil
from dateutil import tz

from darkshield import __version__

logger = logging.getLogger(__name__)

CHUNK_SIZE = 8388608  # 8MB chunks
DEFAULT_FLOAT_FORMAT = "%.10e"


def canonical_json(data: Any) -> str:
    """JSON with sorted keys and fixed separators, used for hashing"""
    return json.dumps(data, sort_keys=True, separators=(",", ":"), default=str)


def parameters_hash(parameters: Mapping[str, Any]) -> str:
    """SHA-256 of the canonical JSON form of a parameter mapping"""
    return hashlib.sha256(canonical_json(parameters).encode("utf-8")).hexdigest()


def host_facts() -> Dict[str, Any]:
    """Machine description recorded in manifests"""
    memory = psutil.virtual_memory()
    return {
        "hostname": platform.node(),
        "platform": platform.platform(),
        "python": platform.python_version(),
        "cpu_count": psutil.cpu_count(logical=True),
        "memory_total": memory.total,
    }


class ArtifactStore:
    """Writes run outputs below a base directory"""

    MANIFEST_FILE = "manifest.json"

    def __init__(self, base_path: Path, float_format: str = DEFAULT_FLOAT_FORMAT):
        """
        Initialize artifact store

        Args:
            base_path: Root directory; one sub-directory per run
            float_format: printf-style format for floats in CSV tables
        """
        self.base_path = Path(base_path).expanduser()
        self.float_format = float_format

    def run_directory(self, name: str) -> Path:
        """Create (if needed) and return the directory of a run"""
        path = self.base_path / name
        path.mkdir(parents=True, exist_ok=True)
        logger.debug(f"Run directory: {path}")
        return path

    def write_table(
        self,
        run_dir: Path,
        filename: str,
        columns: Mapping[str, Sequence[float]],
        header: Optional[Mapping[str, Any]] = None,
    ) -> Path:
        """
        Write a CSV table preceded by '# key: value' comment lines

        Args:
            run_dir: Run directory
            filename: File name inside the run directory
            columns: Column name -> values, all of equal length
            header: Comment block entries

        Returns:
            Path of the written file
        """
        path = Path(run_dir) / filename
        with open(path, "w", encoding="utf-8", newline="") as f:
            write_csv(f, columns, header, self.float_format)
        logger.debug(f"Wrote {path}")
        return path

    def write_json(self, run_dir: Path, filename: str, data: Any) -> Path:
        path = Path(run_dir) / filename
        with open(path, "w", encoding="utf-8") as f:
            json.dump(data, f, indent=2, sort_keys=True, default=str)
            f.write("\n")
        return path

    def write_manifest(
        self,
        run_dir: Path,
        scenario: Mapping[str, Any],
        files: Sequence[Path],
        seed: Optional[int],
        wall_time: float,
    ) -> Dict[str, Any]:
        """
        Write manifest.json for a finished run

        Args:
            run_dir: Run directory
            scenario: Scenario parameters as loaded
            files: Artifact files to checksum
            seed: Random seed used (None for deterministic runs)
            wall_time: Elapsed seconds

        Returns:
            The manifest dictionary
        """
        run_dir = Path(run_dir)
        manifest = {
            "scenario": dict(scenario),
            "parameters_sha256": parameters_hash(scenario),
            "seed": seed,
            "version": __version__,
            "timestamp": datetime.now(tz.tzlocal()).isoformat(),
            "wall_time": wall_time,
            "host": host_facts(),
            "files": [],
            "checksums": {},
        }
        for path in files:
            name = Path(path).name
            manifest["files"].append(name)
            manifest["checksums"][name] = self.calculate_checksum(run_dir / name)

        with open(run_dir / self.MANIFEST_FILE, "w", encoding="utf-8") as f:
            json.dump(manifest, f, indent=2, default=str)
        logger.info(f"Manifest written with {len(manifest['files'])} files: {run_dir}")
        return manifest

    def calculate_checksum(self, file_path: Path) -> str:
        """Calculate SHA256 checksum of file"""
        sha256_hash = hashlib.sha256()
        with open(file_path, "rb") as f:
            while chunk := f.read(CHUNK_SIZE):
                sha256_hash.update(chunk)
        return sha256_hash.hexdigest()

    def load_manifest(self, run_dir: Path) -> Dict[str, Any]:
        with open(Path(run_dir) / self.MANIFEST_FILE, "r", encoding="utf-8") as f:
            return json.load(f)

    def verify(self, run_dir: Path) -> bool:
        """Verify run integrity using the manifest checksums"""
        run_dir = Path(run_dir)
        try:
            manifest = self.load_manifest(run_dir)
            for filename, expected_checksum in manifest["checksums"].items():
                file_path = run_dir / filename
                if not file_path.exists():
                    logger.error(f"Missing file in run: {filename}")
                    return False

                if self.calculate_checksum(file_path) != expected_checksum:
                    logger.error(f"Checksum mismatch for {filename}")
                    return False

            logger.debug("Run verification successful")
            return True
        except (OSError, KeyError, json.JSONDecodeError) as e:
            logger.error(f"Error verifying run {run_dir}: {e}")
            return False

    def list_runs(self) -> List[Dict[str, Any]]:
        """Manifests of all runs below the base path, newest first"""
        runs = []
        if not self.base_path.exists():
            return runs
        for run_dir in self.base_path.iterdir():
            manifest_path = run_dir / self.MANIFEST_FILE
            if not run_dir.is_dir() or not manifest_path.exists():
                continue
            try:
                manifest = self.load_manifest(run_dir)
                manifest["run_path"] = str(run_dir)
                runs.append(manifest)
            except (OSError, json.JSONDecodeError) as e:
                logger.warning(f"Error reading manifest from {run_dir}: {e}")
        runs.sort(key=lambda x: x.get("timestamp", ""), reverse=True)
        return runs


def write_csv(
    stream,
    columns: Mapping[str, Sequence[float]],
    header: Optional[Mapping[str, Any]] = None,
    float_format: str = DEFAULT_FLOAT_FORMAT,
) -> None:
    """Write columns as CSV to an open text stream"""
    arrays = {name: np.asarray(values) for name, values in columns.items()}
    lengths = {array.shape[0] for array in arrays.values()}
    if len(lengths) > 1:
        raise ValueError(f"Columns have different lengths: {sorted(lengths)}")

    for key, value in (header or {}).items():
        stream.write(f"# {key}: {value}\n")
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(list(arrays))
    for row in zip(*arrays.values()):
        writer.writerow([_format_value(value, float_format) for value in row])


def _format_value(value: Any, float_format: str) -> str:
    if isinstance(value, (np.integer, int)) and not isinstance(value, bool):
        return str(int(value))
    if isinstance(value, (np.floating, float)):
        return float_format % float(value)
    return str(value)
