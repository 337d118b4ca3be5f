"""
Scenario files, execution and bundled presets for DarkShield
"""

from darkshield.scenarios.runner import RunResult, ScenarioRunner, check_kind, run_scenario
from darkshield.scenarios.scenario import (
    Scenario,
    golden_detunings,
    list_presets,
    load_preset,
    load_scenario,
    preset_path,
)
from darkshield.scenarios.worker import BatchReport, reproduce_all

__all__ = [
    "BatchReport",
    "RunResult",
    "Scenario",
    "ScenarioRunner",
    "check_kind",
    "golden_detunings",
    "list_presets",
    "load_preset",
    "load_scenario",
    "preset_path",
    "reproduce_all",
    "run_scenario",
]
