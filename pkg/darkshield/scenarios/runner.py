"""
Scenario execution for DarkShield

A run turns a validated Scenario into one long-format table plus a JSON
summary. Tables are computed in memory first so the CLI can stream them to
stdout; `run_scenario` also writes them to a run directory with a manifest.
"""

import logging
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from darkshield import __version__
from darkshield.core.config import Config
from darkshield.core.exceptions import DarkShieldException, ScenarioRunError, ScenarioValidationError
from darkshield.core.model import QubitEnsemble, SingleExcitationState, Trajectory
from darkshield.core.units import HBAR
from darkshield.physics.field import (
    APPROXIMATIONS,
    SphereGeometry,
    field_profile,
    shifted_line_z0,
)
from darkshield.physics.inhomogeneous import (
    eigenmode_evolution,
    normal_modes,
    regime_report,
)
from darkshield.physics.multiphoton import (
    MultiphotonBlock,
    dark_population,
    evolve_block,
    preset_block,
    summarize_block,
)
from darkshield.physics.single_excitation import (
    evolve_detuned_numeric,
    radiated_fraction,
    resonant_trajectory,
)
from darkshield.physics.spectrum import peak_summary, spectrum_analytic, spectrum_numeric
from darkshield.physics.stochastic import SSESpec, ensemble_average, run_sse_ensemble, second_moments
from darkshield.scenarios.scenario import Scenario
from darkshield.storage.artifacts import ArtifactStore, parameters_hash

logger = logging.getLogger(__name__)

SUMMARY_FILE = "summary.json"


@dataclass
class RunResult:
    """Outputs of one scenario run"""

    name: str
    kind: str
    table: Dict[str, Any]
    summary: Dict[str, Any]
    wall_time: float = 0.0
    run_dir: Optional[Path] = None
    regime_warnings: List[str] = field(default_factory=list)

    @property
    def table_name(self) -> str:
        return f"{self.kind}.csv"

    def header(self, parameters: Dict[str, Any]) -> Dict[str, Any]:
        """Comment block for CSV output; contains nothing run-dependent"""
        return {
            "scenario": self.name,
            "kind": self.kind,
            "darkshield": __version__,
            "parameters-sha256": parameters_hash(parameters),
        }


class ScenarioRunner:
    """Runs scenarios with numerics settings taken from a Config"""

    def __init__(self, config: Optional[Config] = None):
        self.config = config or Config()
        self.numerics = self.config.numerics()
        self.condition_limit = float(self.config.get("numerics.condition_limit", 1e12))
        self.degeneracy_tolerance = float(self.config.get("numerics.degeneracy_tolerance", 1e-10))

    def compute(self, scenario: Scenario) -> RunResult:
        """
        Evaluate a scenario without touching the filesystem

        Raises:
            ScenarioRunError: Wrapping any numeric failure, with the scenario name
        """
        handlers = {
            "field": self._run_field,
            "evolve": self._run_evolve,
            "modes": self._run_modes,
            "inhomog": self._run_inhomog,
            "spectrum": self._run_spectrum,
            "block": self._run_block,
            "sse": self._run_sse,
        }
        logger.info(f"Running scenario '{scenario.name}' ({scenario.kind})")
        start = time.perf_counter()
        try:
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always")
                table, summary = handlers[scenario.kind](scenario)
        except DarkShieldException as e:
            logger.error(f"Scenario '{scenario.name}' failed: {e.message}")
            raise ScenarioRunError(
                f"Scenario '{scenario.name}' failed: {e.message}",
                details={"scenario": scenario.name, "cause": e.to_dict()},
            ) from e
        except (ValueError, FloatingPointError, np.linalg.LinAlgError) as e:
            logger.error(f"Scenario '{scenario.name}' failed: {e}")
            raise ScenarioRunError(
                f"Scenario '{scenario.name}' failed: {e}",
                details={"scenario": scenario.name, "cause": {"error": type(e).__name__, "message": str(e)}},
            ) from e

        messages = []
        for warning in caught:
            messages.append(str(warning.message))
            logger.warning(f"{scenario.name}: {warning.message}")
        wall_time = time.perf_counter() - start
        logger.info(f"Scenario '{scenario.name}' finished in {wall_time:.2f} s")
        return RunResult(
            name=scenario.name, kind=scenario.kind, table=table, summary=summary,
            wall_time=wall_time, regime_warnings=messages,
        )

    def run(self, scenario: Scenario, store: ArtifactStore) -> RunResult:
        """Compute a scenario and write its table, summary and manifest"""
        result = self.compute(scenario)
        run_dir = store.run_directory(scenario.name)
        files = [
            store.write_table(run_dir, result.table_name, result.table, result.header(scenario.parameters)),
            store.write_json(run_dir, SUMMARY_FILE, result.summary),
        ]
        store.write_manifest(run_dir, scenario.parameters, files, scenario.seed, result.wall_time)
        result.run_dir = run_dir
        return result

    # -- kinds -----------------------------------------------------------

    def _run_field(self, scenario: Scenario):
        settings = scenario.settings
        rho = np.linspace(0.0, settings["rho_max"], settings["samples"])
        terms = settings.get("terms") or int(self.config.get("field.terms", 20))
        selected = settings.get("approximation")
        columns: Dict[str, List] = {"z0": [], "rho": []}
        if selected:
            columns["e"] = []
        else:
            for approx in APPROXIMATIONS:
                columns[approx] = []
            columns["line_shifted"] = []

        summary: Dict[str, Any] = {"z0": {}}
        for z0 in settings["z0"]:
            geom = SphereGeometry(z0)
            shifted = SphereGeometry(shifted_line_z0(z0))
            profiles = {approx: field_profile(geom, approx, rho, terms) for approx in APPROXIMATIONS}
            line_shifted = field_profile(shifted, "line", rho, terms)
            columns["z0"].extend([z0] * rho.size)
            columns["rho"].extend(rho)
            if selected:
                columns["e"].extend(profiles[selected])
            else:
                for approx in APPROXIMATIONS:
                    columns[approx].extend(profiles[approx])
                columns["line_shifted"].extend(line_shifted)

            series = profiles["series"]
            summary["z0"][str(z0)] = {
                "z_inf": geom.z_inf,
                "shifted_line_z0": shifted.z0,
                "point_max_relative_deviation": _max_relative(profiles["point"], series),
                "line_max_relative_deviation": _max_relative(profiles["line"], series),
                "shifted_line_vs_point": _max_relative(line_shifted, profiles["point"]),
            }
        return columns, summary

    def _trajectory(self, scenario: Scenario, state: SingleExcitationState,
                    ensemble: Optional[QubitEnsemble] = None) -> Trajectory:
        ensemble = ensemble or scenario.ensemble
        method = scenario.settings.get("method", "eigen")
        if method == "auto":
            method = "analytic" if ensemble.is_resonant else "eigen"
        if method == "analytic":
            return resonant_trajectory(state, scenario.mu, ensemble.rabi, scenario.times, ensemble.detunings)
        if method == "numeric":
            return evolve_detuned_numeric(
                state, scenario.mu, ensemble.rabi, ensemble.detunings, scenario.times, **self.numerics
            )
        return eigenmode_evolution(
            state, scenario.mu, ensemble.rabi, ensemble.detunings, scenario.times,
            condition_limit=self.condition_limit,
            degeneracy_tolerance=self.degeneracy_tolerance,
            **self.numerics,
        )

    def _run_evolve(self, scenario: Scenario):
        ensemble = scenario.ensemble
        columns = _trajectory_columns(ensemble.count)
        summary: Dict[str, Any] = {
            "count": ensemble.count,
            "collective_rabi": ensemble.collective_rabi,
            "mu": scenario.mu,
            "initial": {},
        }
        for label, state in scenario.initial:
            trajectory = self._trajectory(scenario, state)
            _extend(columns, label, trajectory, ensemble)
            summary["initial"][label] = {
                "retained_resonant": 1.0 - radiated_fraction(state, ensemble.rabi),
                "final_qubit_population": float(trajectory.total_qubit_population[-1]),
                "final_photon_population": float(trajectory.photon_population[-1]),
                "final_norm": float(trajectory.norm[-1]),
            }
        return columns, summary

    def _run_modes(self, scenario: Scenario):
        ensemble = scenario.ensemble
        modes = normal_modes(scenario.mu, ensemble.rabi, ensemble.detunings)
        columns = {
            "mode": np.arange(modes.roots.size),
            "re_p_mev": modes.roots.real,
            "im_p_mev": modes.roots.imag,
            "decay_per_fs": -modes.rates.real,
            "lifetime_fs": np.where(modes.roots.real < 0, -HBAR / np.minimum(modes.roots.real, -1e-300), np.inf),
        }
        trace = complex(np.sum(modes.roots))
        expected = -scenario.mu / 2.0 - 1j * float(np.sum(ensemble.detunings))
        summary = {
            "count": ensemble.count,
            "collective_rabi": ensemble.collective_rabi,
            "condition": modes.condition,
            "trace_error": abs(trace - expected),
        }
        return columns, summary

    def _run_inhomog(self, scenario: Scenario):
        base = scenario.ensemble
        sweep = scenario.settings.get("sweep") or [base.collective_rabi]
        columns = _trajectory_columns(base.count, leading=("collective_rabi",))
        half_width = float(np.max(np.abs(base.detunings)))
        summary: Dict[str, Any] = {"count": base.count, "mu": scenario.mu, "half_width": half_width, "runs": []}

        for omega_n in sweep:
            rabi = base.rabi * omega_n / base.collective_rabi
            ensemble = QubitEnsemble(detunings=base.detunings, rabi=rabi, positions=base.positions)
            entry: Dict[str, Any] = {"collective_rabi": omega_n, "initial": {}}
            if half_width > 0:
                entry["regime"] = regime_report(scenario.mu, omega_n, half_width, base.count).as_dict()
            for label, state in scenario.initial:
                trajectory = self._trajectory(scenario, state, ensemble)
                start = len(columns["t_fs"])
                _extend(columns, label, trajectory, ensemble)
                columns["collective_rabi"].extend([omega_n] * (len(columns["t_fs"]) - start))
                entry["initial"][label] = {
                    "retained_resonant": 1.0 - radiated_fraction(state, ensemble.rabi),
                    "final_qubit_population": float(trajectory.total_qubit_population[-1]),
                    "min_qubit_population": float(trajectory.total_qubit_population.min()),
                }
            summary["runs"].append(entry)
        summary["detuning_mean_square"] = float(np.mean(base.detunings ** 2))
        return columns, summary

    def _run_spectrum(self, scenario: Scenario):
        settings = scenario.settings
        samples = settings.get("samples") or int(self.config.get("spectrum.samples", 2001))
        nu = np.linspace(settings["nu_min"], settings["nu_max"], samples)
        omega = scenario.cavity.frequency or 0.0
        columns: Dict[str, List] = {"count": [], "nu_mev": [], "s": []}
        summary: Dict[str, Any] = {"rabi": settings["rabi"], "mu": scenario.mu, "method": settings["method"],
                                   "counts": {}}
        for count in settings["counts"]:
            if settings["method"] == "analytic":
                spectrum = spectrum_analytic(nu, settings["rabi"], scenario.mu, count,
                                             omega=omega, convention=settings["convention"])
            else:
                spectrum = self._numeric_spectrum(scenario, count, nu, omega)
            columns["count"].extend([count] * nu.size)
            columns["nu_mev"].extend(nu)
            columns["s"].extend(spectrum.s)
            peaks = peak_summary(spectrum)
            summary["counts"][str(count)] = {
                "peaks": [{"position": p.position, "height": p.height, "fwhm": p.fwhm} for p in peaks],
                "max_height_times_count": float(spectrum.s.max() * count),
                "tail_bound": spectrum.tail_bound,
            }
        return columns, summary

    def _numeric_spectrum(self, scenario: Scenario, count: int, nu: np.ndarray, omega: float):
        settings = scenario.settings
        mu = scenario.mu
        rabi = settings["rabi"]
        cutoff = settings.get("cutoff") or float(self.config.get("spectrum.cutoff", 40.0))
        t_max = cutoff * HBAR / mu
        fastest = max(np.sqrt(count) * rabi, mu, np.max(np.abs(nu - (omega if settings["convention"] == "absolute"
                                                                        else 0.0))))
        dt = min(0.25 * HBAR / fastest, 2.0 * t_max / 4000)
        times = np.arange(int(np.ceil(2.0 * t_max / dt)) + 2) * dt
        state = SingleExcitationState.qubit_excited(count, 1)
        trajectory = resonant_trajectory(state, mu, np.full(count, rabi, dtype=complex), times)
        return spectrum_numeric(
            trajectory.c10, times, nu, t_max, t_max, mu=mu, omega=omega, convention=settings["convention"]
        )

    def _run_block(self, scenario: Scenario):
        settings = scenario.settings
        columns: Dict[str, List] = {"count": [], "initial": [], "t_fs": [], "dark": [], "retained": [], "norm": []}
        for n in range(settings["total"] + 1):
            columns[f"n{n}"] = []
        summary: Dict[str, Any] = {"total": settings["total"], "rabi": settings["rabi"], "mu": scenario.mu,
                                   "runs": []}

        for count in settings["counts"]:
            for label, start in settings["initial"]:
                block = _initial_block(start, count, settings["total"])
                trajectory = evolve_block(block, settings["rabi"], scenario.mu, scenario.times, **self.numerics)
                dark = dark_population(trajectory)
                layers = trajectory.layer_populations()
                initial_qubits = layers[0, 0]
                retained = dark / initial_qubits if initial_qubits > 0 else np.zeros_like(dark)
                size = trajectory.times.size
                columns["count"].extend([count] * size)
                columns["initial"].extend([label] * size)
                columns["t_fs"].extend(trajectory.times)
                columns["dark"].extend(dark)
                columns["retained"].extend(retained)
                columns["norm"].extend(trajectory.norm)
                for n in range(settings["total"] + 1):
                    columns[f"n{n}"].extend(layers[:, n])
                entry = {
                    "count": count,
                    "initial": label,
                    "final_dark": float(dark[-1]),
                    "retained_fraction": float(retained[-1]),
                }
                entry.update(summarize_block(trajectory))
                summary["runs"].append(entry)
        return columns, summary

    def _run_sse(self, scenario: Scenario):
        settings = scenario.settings
        ensemble = scenario.ensemble
        label, state = scenario.initial[0]
        count = settings.get("trajectories") or int(self.config.get("sse.trajectories", 1000))
        noise_form = settings.get("dephasing_noise") or self.config.get("sse.dephasing_noise", "mean-square")
        spec = SSESpec(mu=scenario.mu, relaxation=settings["relaxation"], dephasing_noise=noise_form)
        trajectories = run_sse_ensemble(
            state, spec, ensemble, scenario.times, count, scenario.seed,
            substeps=settings["substeps"],
        )
        norm = ensemble_average(trajectories, lambda tr: tr.norm)
        qubits = ensemble_average(trajectories, lambda tr: tr.total_qubit_population)
        photon = ensemble_average(trajectories, lambda tr: tr.photon_population)
        moments = second_moments(state, spec, ensemble, scenario.times, **self.numerics)
        oracle_qubits = np.einsum("tii->t", moments[:, 1:, 1:]).real
        oracle_photon = moments[:, 0, 0].real

        columns = {
            "t_fs": scenario.times,
            "norm_mean": norm.mean,
            "norm_stderr": norm.stderr,
            "qubits_mean": qubits.mean,
            "qubits_stderr": qubits.stderr,
            "photon_mean": photon.mean,
            "photon_stderr": photon.stderr,
            "qubits_oracle": oracle_qubits,
            "photon_oracle": oracle_photon,
        }
        with np.errstate(divide="ignore", invalid="ignore"):
            z = np.abs(norm.mean - 1.0) / norm.stderr
        summary = {
            "initial": label,
            "trajectories": count,
            "seed": scenario.seed,
            "dephasing_noise": noise_form,
            "max_norm_deviation_in_stderr": float(np.nanmax(np.where(norm.stderr > 0, z, 0.0))),
            "max_qubit_deviation_from_oracle": float(np.max(np.abs(qubits.mean - oracle_qubits))),
        }
        return columns, summary


def _initial_block(start: Any, count: int, total: int) -> MultiphotonBlock:
    """Named preset, or explicit {(n, members): amplitude} entries"""
    if isinstance(start, str):
        return preset_block(start, count, total)
    return MultiphotonBlock.from_amplitudes(count, total, start)


def _trajectory_columns(count: int, leading: Tuple[str, ...] = ()) -> Dict[str, List]:
    """Empty trajectory table: photon, q1..qN, their sum, Re/Im F and the norm"""
    names = [*leading, "initial", "t_fs", "photon"]
    names += [f"q{j}" for j in range(1, count + 1)]
    names += ["qubits", "re_f", "im_f", "norm"]
    return {name: [] for name in names}


def _extend(columns: Dict[str, List], label: str, trajectory: Trajectory, ensemble: QubitEnsemble) -> None:
    size = len(trajectory)
    columns["initial"].extend([label] * size)
    columns["t_fs"].extend(trajectory.times)
    columns["photon"].extend(trajectory.photon_population)
    populations = trajectory.qubit_populations
    for j in range(trajectory.count):
        columns[f"q{j + 1}"].extend(populations[:, j])
    columns["qubits"].extend(trajectory.total_qubit_population)
    coupling = trajectory.coupling_amplitude(ensemble.rabi, ensemble.detunings)
    columns["re_f"].extend(coupling.real)
    columns["im_f"].extend(coupling.imag)
    columns["norm"].extend(trajectory.norm)


def _max_relative(values: np.ndarray, reference: np.ndarray) -> float:
    scale = np.max(np.abs(reference))
    return float(np.max(np.abs(values - reference)) / scale) if scale > 0 else 0.0


def run_scenario(scenario: Scenario, config: Optional[Config] = None,
                 store: Optional[ArtifactStore] = None) -> RunResult:
    """
    Run a scenario and write its artifacts

    Args:
        scenario: Validated scenario
        config: Configuration (defaults when omitted)
        store: Artifact store; defaults to the configured output directory

    Returns:
        RunResult with run_dir set
    """
    config = config or Config()
    if store is None:
        store = ArtifactStore(config.get_output_dir(), config.get("output.float_format", "%.10e"))
    return ScenarioRunner(config).run(scenario, store)


def check_kind(scenario: Scenario, kind: str) -> None:
    """Reject a scenario given to the wrong subcommand"""
    if scenario.kind != kind:
        raise ScenarioValidationError(
            f"Scenario '{scenario.name}' is of kind '{scenario.kind}', not '{kind}'",
            [("kind", f"expected '{kind}'")],
        )
