"""
Parallel execution of bundled scenarios
"""

import logging
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import psutil

from darkshield.core.config import Config
from darkshield.scenarios.runner import ScenarioRunner
from darkshield.scenarios.scenario import list_presets, load_preset
from darkshield.storage.artifacts import ArtifactStore

logger = logging.getLogger(__name__)


@dataclass
class BatchReport:
    """Outcome of a batch: overall success, a one-line message and per-run results"""

    success: bool
    message: str
    results: List[Dict[str, Any]] = field(default_factory=list)


def _run_preset(name: str, config: Config, output_dir: Path) -> Dict[str, Any]:
    """Run one preset; never raises so one failure does not stop the batch"""
    try:
        scenario = load_preset(name)
        store = ArtifactStore(output_dir, config.get("output.float_format", "%.10e"))
        result = ScenarioRunner(config).run(scenario, store)
        return {
            "name": name,
            "success": True,
            "run_dir": str(result.run_dir),
            "wall_time": result.wall_time,
        }
    except Exception as e:
        logger.error(f"Error running preset {name}: {e}")
        return {"name": name, "success": False, "error": str(e)}


def worker_count(config: Config, jobs: int) -> int:
    """Pool size: general.max_concurrent_jobs capped by physical cores and job count"""
    requested = int(config.get("general.max_concurrent_jobs", 2))
    cores = psutil.cpu_count(logical=False) or psutil.cpu_count() or 1
    return max(1, min(requested, cores, jobs))


def reproduce_all(
    config: Config,
    names: Optional[Sequence[str]] = None,
    output_dir: Optional[Path] = None,
) -> BatchReport:
    """
    Run bundled presets in a process pool, each into its own run directory

    Args:
        config: Configuration
        names: Presets to run (all bundled presets when omitted)
        output_dir: Output root (configured directory when omitted)

    Returns:
        BatchReport with one {name, success, error} entry per preset
    """
    names = list(names) if names is not None else list_presets()
    output_dir = Path(output_dir) if output_dir is not None else config.get_output_dir()
    total = len(names)
    if total == 0:
        return BatchReport(success=False, message="No scenarios to run")

    workers = worker_count(config, total)
    logger.info(f"Running {total} scenario(s) with {workers} worker(s) into {output_dir}")

    outcomes: Dict[str, Dict[str, Any]] = {}
    if workers == 1:
        for name in names:
            outcomes[name] = _run_preset(name, config, output_dir)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {pool.submit(_run_preset, name, config, output_dir): name for name in names}
            for future in as_completed(futures):
                name = futures[future]
                try:
                    outcomes[name] = future.result()
                except Exception as e:
                    logger.error(f"Worker for {name} crashed: {e}")
                    outcomes[name] = {"name": name, "success": False, "error": str(e)}

    results = [outcomes[name] for name in names]
    success, message = summarize(results)
    logger.info(message)
    return BatchReport(success=success, message=message, results=results)


def summarize(results: List[Dict[str, Any]]) -> Tuple[bool, str]:
    total = len(results)
    success_count = sum(1 for r in results if r.get("success"))
    if success_count == total:
        return True, f"All {total} scenario(s) completed successfully"
    if success_count > 0:
        return True, f"{success_count} succeeded, {total - success_count} failed"
    return False, f"All {total} scenario(s) failed"
