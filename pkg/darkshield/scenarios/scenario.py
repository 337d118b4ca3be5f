"""
Scenario files for DarkShield

A scenario is a YAML document describing one numerical experiment. Energies
and times carry unit suffixes ("120 meV", "20 fs", "1000 /mu") and are
converted on load. Validation collects every problem before failing, so a
broken file reports all of its bad fields at once.
"""

import copy
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import yaml

from darkshield.core.exceptions import DarkShieldException, ScenarioValidationError
from darkshield.core.model import CavitySpec, QubitEnsemble, RelaxationSpec, SingleExcitationState
from darkshield.core.units import lifetime_to_energy, parse_quantity
from darkshield.physics.field import APPROXIMATIONS, DEFAULT_TERMS, SphereGeometry, rabi_profile, substrate_positions

logger = logging.getLogger(__name__)

PRESET_DIR = Path(__file__).parent / "presets"
PRESET_SUFFIX = ".scenario"

KINDS = ("field", "evolve", "modes", "inhomog", "spectrum", "block", "sse")
DISTRIBUTIONS = ("none", "explicit", "uniform", "gaussian", "golden")
INITIAL_PRESETS = ("qubit", "bright", "photon", "ground", "explicit")
BLOCK_PRESETS = ("pair-excited", "symmetric", "antisymmetric", "disjoint-uniform")
GOLDEN_STEP = (np.sqrt(5.0) - 1.0) / 2.0


def golden_detunings(count: int, half_width: float, seed: int = 0) -> np.ndarray:
    """
    Low-discrepancy detunings in [-half_width, half_width)

    u_j = frac(1/2 + (seed + j - 1) * g) with g the golden-ratio conjugate;
    seed 0 puts qubit 1 at the band centre.
    """
    index = np.arange(count) + seed
    u = np.mod(0.5 + index * GOLDEN_STEP, 1.0)
    return half_width * (2.0 * u - 1.0)


@dataclass(frozen=True)
class Scenario:
    """
    Validated scenario

    `parameters` is the document as loaded and is what manifests record;
    the remaining fields are resolved, unit-converted values.
    """

    name: str
    kind: str
    parameters: Dict[str, Any]
    description: str = ""
    cavity: Optional[CavitySpec] = None
    ensemble: Optional[QubitEnsemble] = None
    initial: Tuple[Tuple[str, SingleExcitationState], ...] = ()
    times: Optional[np.ndarray] = None
    settings: Dict[str, Any] = field(default_factory=dict)
    seed: Optional[int] = None

    @property
    def mu(self) -> float:
        return self.cavity.decay if self.cavity is not None else 0.0

    @classmethod
    def from_mapping(cls, data: Any) -> "Scenario":
        """Validate a parsed document"""
        return _ScenarioBuilder(data).build()

    @classmethod
    def from_manifest(cls, path: Path) -> "Scenario":
        """Rebuild the scenario recorded in a run manifest (file or run directory)"""
        path = Path(path)
        if path.is_dir():
            path = path / "manifest.json"
        try:
            with open(path, "r", encoding="utf-8") as f:
                manifest = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise ScenarioValidationError(f"Cannot read manifest {path}", [("manifest", str(e))]) from e
        if "scenario" not in manifest:
            raise ScenarioValidationError(f"Manifest {path} has no scenario", [("scenario", "missing")])
        return cls.from_mapping(manifest["scenario"])


def load_scenario(path: Path) -> Scenario:
    """
    Load and validate a scenario file

    Raises:
        ScenarioValidationError: With every (field path, message) problem found
    """
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f)
    except OSError as e:
        raise ScenarioValidationError(f"Cannot read scenario {path}", [("file", str(e))]) from e
    except yaml.YAMLError as e:
        raise ScenarioValidationError(f"Invalid YAML in {path}", [("file", str(e))]) from e

    scenario = Scenario.from_mapping(data)
    logger.info(f"Loaded scenario '{scenario.name}' ({scenario.kind}) from {path}")
    return scenario


# Alternative names accepted by load_preset
PRESET_ALIASES = {"fig2": "shielding", "fig3": "broadening"}


def list_presets(include_aliases: bool = False) -> List[str]:
    """Names of the bundled scenarios"""
    names = sorted(p.stem for p in PRESET_DIR.glob(f"*{PRESET_SUFFIX}"))
    if include_aliases:
        names += sorted(PRESET_ALIASES)
    return names


def preset_path(name: str) -> Path:
    if name.endswith(PRESET_SUFFIX):
        name = name[: -len(PRESET_SUFFIX)]
    path = PRESET_DIR / f"{PRESET_ALIASES.get(name, name)}{PRESET_SUFFIX}"
    if not path.exists():
        raise ScenarioValidationError(
            f"Unknown preset '{name}'", [("preset", f"available: {', '.join(list_presets(include_aliases=True))}")]
        )
    return path


def load_preset(name: str) -> Scenario:
    return load_scenario(preset_path(name))


class _ScenarioBuilder:
    """Resolves one document, recording errors instead of stopping at the first"""

    def __init__(self, data: Any):
        self.data = data
        self.errors: List[Tuple[str, str]] = []

    # -- primitive checks ------------------------------------------------

    def error(self, path: str, message: str) -> None:
        self.errors.append((path, message))

    def section(self, mapping: Any, key: str, path: str, required: bool = True) -> Optional[Dict[str, Any]]:
        value = mapping.get(key) if isinstance(mapping, dict) else None
        if value is None:
            if required:
                self.error(path, "required section is missing")
            return None
        if not isinstance(value, dict):
            self.error(path, "must be a mapping")
            return None
        return value

    def quantity(self, mapping: Dict[str, Any], key: str, path: str, kind: str,
                 required: bool = True, decay: Optional[float] = None,
                 minimum: Optional[float] = 0.0, strict: bool = False) -> Optional[float]:
        if key not in mapping or mapping[key] is None:
            if required:
                self.error(path, "required value is missing")
            return None
        try:
            value = parse_quantity(mapping[key], kind, decay=decay)
        except DarkShieldException as e:
            self.error(path, e.message)
            return None
        if minimum is not None and (value < minimum or (strict and value == minimum)):
            self.error(path, f"must be {'>' if strict else '>='} {minimum}, got {value}")
            return None
        return value

    def integer(self, mapping: Dict[str, Any], key: str, path: str, required: bool = True,
                minimum: int = 0, default: Optional[int] = None) -> Optional[int]:
        if key not in mapping or mapping[key] is None:
            if required:
                self.error(path, "required value is missing")
            return default
        value = mapping[key]
        if isinstance(value, bool) or not isinstance(value, int):
            self.error(path, f"must be an integer, got {value!r}")
            return None
        if value < minimum:
            self.error(path, f"must be >= {minimum}, got {value}")
            return None
        return value

    def number(self, mapping: Dict[str, Any], key: str, path: str, required: bool = True,
               default: Optional[float] = None) -> Optional[float]:
        if key not in mapping or mapping[key] is None:
            if required:
                self.error(path, "required value is missing")
            return default
        value = mapping[key]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            self.error(path, f"must be a number, got {value!r}")
            return None
        return float(value)

    def choice(self, mapping: Dict[str, Any], key: str, path: str, options, default: Optional[str] = None):
        value = mapping.get(key, default)
        if value is None:
            self.error(path, "required value is missing")
            return None
        if value not in options:
            self.error(path, f"must be one of {', '.join(options)}, got {value!r}")
            return None
        return value

    def quantity_list(self, values: Any, path: str, kind: str, decay: Optional[float] = None,
                      minimum: Optional[float] = None) -> Optional[List[float]]:
        if not isinstance(values, list) or not values:
            self.error(path, "must be a nonempty list")
            return None
        result = []
        for i, item in enumerate(values):
            parsed = self.quantity({"v": item}, "v", f"{path}[{i}]", kind, decay=decay, minimum=minimum)
            result.append(parsed)
        return None if any(v is None for v in result) else result

    # -- sections --------------------------------------------------------

    def build(self) -> Scenario:
        data = self.data
        if not isinstance(data, dict):
            raise ScenarioValidationError("Scenario must be a mapping", [("", "document is not a mapping")])

        name = data.get("name")
        if not isinstance(name, str) or not name:
            self.error("name", "required string is missing")
        kind = self.choice(data, "kind", "kind", KINDS)
        seed = self.integer(data, "seed", "seed", required=False)

        cavity = None
        ensemble = None
        initial: Tuple[Tuple[str, SingleExcitationState], ...] = ()
        times = None
        settings: Dict[str, Any] = {}

        if kind == "field":
            settings = self.field_settings()
        elif kind is not None:
            cavity = self.cavity()
            if kind in ("evolve", "modes", "inhomog", "sse"):
                ensemble = self.ensemble(seed)
            if kind in ("evolve", "inhomog", "sse"):
                initial = self.initial(ensemble)
            if kind in ("evolve", "inhomog", "sse", "block"):
                times = self.times(cavity)
            if kind == "evolve":
                settings["method"] = self.choice(
                    data, "method", "method", ("auto", "analytic", "numeric", "eigen"), default="auto"
                )
            elif kind == "inhomog":
                settings["sweep"] = self.sweep()
            elif kind == "spectrum":
                settings = self.spectrum_settings(cavity)
            elif kind == "block":
                settings = self.block_settings()
            elif kind == "sse":
                settings = self.sse_settings(ensemble)
                if initial and len(initial) != 1:
                    self.error("initial", "sse scenarios take exactly one initial state")

        if self.errors:
            label = name if isinstance(name, str) else "<unnamed>"
            for path, message in self.errors:
                logger.debug(f"Scenario '{label}': {path}: {message}")
            raise ScenarioValidationError(
                f"Scenario '{label}' has {len(self.errors)} invalid field(s)", self.errors
            )

        return Scenario(
            name=name,
            kind=kind,
            parameters=copy.deepcopy(data),
            description=str(data.get("description", "")),
            cavity=cavity,
            ensemble=ensemble,
            initial=initial,
            times=times,
            settings=settings,
            seed=seed,
        )

    def cavity(self) -> Optional[CavitySpec]:
        section = self.section(self.data, "cavity", "cavity")
        if section is None:
            return None
        has_decay = section.get("decay") is not None
        has_lifetime = section.get("lifetime") is not None
        if has_decay == has_lifetime:
            self.error("cavity.decay", "give exactly one of cavity.decay (energy) or cavity.lifetime (time)")
            return None
        if has_decay:
            decay = self.quantity(section, "decay", "cavity.decay", "energy")
        else:
            lifetime = self.quantity(section, "lifetime", "cavity.lifetime", "time", minimum=0.0, strict=True)
            decay = lifetime_to_energy(lifetime) if lifetime is not None else None
        frequency = self.quantity(section, "frequency", "cavity.frequency", "energy",
                                  required=False, minimum=0.0, strict=True)
        if decay is None:
            return None
        return CavitySpec(decay=decay, frequency=frequency)

    def ensemble(self, seed: Optional[int]) -> Optional[QubitEnsemble]:
        section = self.section(self.data, "ensemble", "ensemble")
        if section is None:
            return None
        count = self.integer(section, "count", "ensemble.count", minimum=1)
        if count is None:
            return None

        positions = None
        rabi = None
        if "field" in section:
            field_section = self.section(section, "field", "ensemble.field")
            if field_section is not None:
                positions, rabi = self.field_rabi(field_section, count)
        elif "rabi" in section:
            value = section["rabi"]
            if isinstance(value, list):
                values = self.quantity_list(value, "ensemble.rabi", "energy", minimum=0.0)
                if values is not None and len(values) != count:
                    self.error("ensemble.rabi", f"has {len(values)} entries for {count} qubits")
                elif values is not None:
                    rabi = np.asarray(values)
            else:
                single = self.quantity(section, "rabi", "ensemble.rabi", "energy", minimum=0.0, strict=True)
                rabi = None if single is None else np.full(count, single)
        else:
            self.error("ensemble.rabi", "give either ensemble.rabi or ensemble.field")

        if rabi is not None and "collective_rabi" in section:
            target = self.quantity(section, "collective_rabi", "ensemble.collective_rabi", "energy",
                                   minimum=0.0, strict=True)
            if target is not None:
                rabi = rabi * target / np.sqrt(np.sum(np.abs(rabi) ** 2))

        detunings = self.detunings(section, count, seed)
        if rabi is None or detunings is None:
            return None
        try:
            return QubitEnsemble(detunings=detunings, rabi=rabi, positions=positions)
        except DarkShieldException as e:
            self.error("ensemble", e.message)
            return None

    def field_rabi(self, section: Dict[str, Any], count: int):
        z0 = self.number(section, "z0", "ensemble.field.z0")
        approx = self.choice(section, "approximation", "ensemble.field.approximation", APPROXIMATIONS,
                             default="line")
        terms = self.integer(section, "terms", "ensemble.field.terms", required=False, minimum=1,
                             default=DEFAULT_TERMS)
        peak = self.quantity(section, "peak_rabi", "ensemble.field.peak_rabi", "energy", minimum=0.0, strict=True)
        rho_max = self.number(section, "rho_max", "ensemble.field.rho_max", required=False, default=1.0)
        radius = self.number(section, "radius_nm", "ensemble.field.radius_nm", required=False, default=10.0)
        if None in (z0, approx, terms, peak, rho_max, radius):
            return None, None
        try:
            geom = SphereGeometry(z0=z0, radius_nm=radius)
            positions = substrate_positions(count, rho_max)
            return positions, rabi_profile(geom, approx, peak, positions, terms)
        except DarkShieldException as e:
            self.error("ensemble.field", e.message)
            return None, None

    def detunings(self, section: Dict[str, Any], count: int, seed: Optional[int]) -> Optional[np.ndarray]:
        spec = section.get("detunings", {"distribution": "none"})
        if not isinstance(spec, dict):
            self.error("ensemble.detunings", "must be a mapping")
            return None
        distribution = self.choice(spec, "distribution", "ensemble.detunings.distribution",
                                   DISTRIBUTIONS, default="none")
        if distribution is None:
            return None
        if distribution == "none":
            return np.zeros(count)
        if distribution == "explicit":
            values = self.quantity_list(spec.get("values"), "ensemble.detunings.values", "energy", minimum=None)
            if values is not None and len(values) != count:
                self.error("ensemble.detunings.values", f"has {len(values)} entries for {count} qubits")
                return None
            return None if values is None else np.asarray(values)

        half_width = self.quantity(spec, "half_width", "ensemble.detunings.half_width", "energy",
                                   minimum=0.0, strict=True)
        local_seed = self.integer(spec, "seed", "ensemble.detunings.seed", required=False,
                                  default=seed if seed is not None else 0)
        if half_width is None or local_seed is None:
            return None
        if distribution == "golden":
            return golden_detunings(count, half_width, local_seed)
        rng = np.random.default_rng(local_seed)
        if distribution == "uniform":
            return rng.uniform(-half_width, half_width, count)
        return rng.normal(0.0, half_width / np.sqrt(2.0), count)

    def initial(self, ensemble: Optional[QubitEnsemble]) -> Tuple[Tuple[str, SingleExcitationState], ...]:
        entries = self.data.get("initial")
        if entries is None:
            self.error("initial", "required section is missing")
            return ()
        if isinstance(entries, dict):
            entries = [entries]
        if not isinstance(entries, list) or not entries:
            self.error("initial", "must be a mapping or a nonempty list of mappings")
            return ()

        states = []
        for i, entry in enumerate(entries):
            path = f"initial[{i}]"
            if not isinstance(entry, dict):
                self.error(path, "must be a mapping")
                continue
            preset = self.choice(entry, "preset", f"{path}.preset", INITIAL_PRESETS)
            if preset is None or ensemble is None:
                continue
            label = str(entry.get("label", preset))
            count = ensemble.count
            try:
                if preset == "qubit":
                    qubit = self.integer(entry, "qubit", f"{path}.qubit", minimum=1)
                    if qubit is None:
                        continue
                    state = SingleExcitationState.qubit_excited(count, qubit)
                elif preset == "bright":
                    state = SingleExcitationState.bright(ensemble.rabi)
                elif preset == "photon":
                    state = SingleExcitationState.photon(count)
                elif preset == "ground":
                    state = SingleExcitationState.ground(count)
                else:
                    state = self.explicit_state(entry, path, count)
                    if state is None:
                        continue
            except DarkShieldException as e:
                self.error(path, e.message)
                continue
            states.append((label, state))
        return tuple(states)

    def explicit_state(self, entry: Dict[str, Any], path: str, count: int) -> Optional[SingleExcitationState]:
        amplitudes = entry.get("qubits")
        if not isinstance(amplitudes, list) or len(amplitudes) != count:
            self.error(f"{path}.qubits", f"must list {count} amplitudes")
            return None
        try:
            c0 = np.array([complex(str(a).replace(" ", "")) for a in amplitudes])
            c10 = complex(str(entry.get("photon", 0)).replace(" ", ""))
            c00 = complex(str(entry.get("ground", 0)).replace(" ", ""))
        except ValueError as e:
            self.error(f"{path}.qubits", f"cannot parse amplitude: {e}")
            return None
        return SingleExcitationState(c00=c00, c10=c10, c0=c0)

    def times(self, cavity: Optional[CavitySpec]) -> Optional[np.ndarray]:
        section = self.section(self.data, "time", "time")
        if section is None:
            return None
        decay = cavity.decay if cavity is not None and cavity.decay > 0 else None
        end = self.quantity(section, "end", "time.end", "time", decay=decay, minimum=0.0, strict=True)
        start = self.quantity(section, "start", "time.start", "time", required=False, decay=decay)
        if section.get("step") is not None and section.get("samples") is not None:
            self.error("time.step", "give either time.samples or time.step, not both")
            return None
        if section.get("step") is not None:
            step = self.quantity(section, "step", "time.step", "time", decay=decay, minimum=0.0, strict=True)
            samples = None
        else:
            step = None
            samples = self.integer(section, "samples", "time.samples", minimum=2)
        if end is None or (samples is None and step is None):
            return None
        start = start or 0.0
        if end <= start:
            self.error("time.end", "must exceed time.start")
            return None
        if step is not None:
            # grid spacing is exactly step; the last point may fall short of end
            intervals = int(np.floor((end - start) / step * (1.0 + 1e-12)))
            if intervals < 1:
                self.error("time.step", f"must not exceed the span {end - start} fs")
                return None
            return start + step * np.arange(intervals + 1)
        return np.linspace(start, end, samples)

    def sweep(self) -> Optional[List[float]]:
        section = self.section(self.data, "sweep", "sweep", required=False)
        if section is None:
            return None
        return self.quantity_list(section.get("collective_rabi"), "sweep.collective_rabi", "energy", minimum=0.0)

    def field_settings(self) -> Dict[str, Any]:
        section = self.section(self.data, "field", "field")
        if section is None:
            return {}
        z0_values = section.get("z0")
        if not isinstance(z0_values, list):
            z0_values = [z0_values]
        z0 = []
        for i, value in enumerate(z0_values):
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                self.error(f"field.z0[{i}]", f"must be a number, got {value!r}")
            elif value <= 1.0:
                self.error(f"field.z0[{i}]", f"must exceed 1, got {value}")
            else:
                z0.append(float(value))
        approximation = None
        if section.get("approximation") is not None:
            approximation = self.choice(section, "approximation", "field.approximation", APPROXIMATIONS)
        return {
            "z0": z0,
            "approximation": approximation,
            "terms": self.integer(section, "terms", "field.terms", required=False, minimum=1),
            "rho_max": self.number(section, "rho_max", "field.rho_max", required=False, default=1.0),
            "samples": self.integer(section, "samples", "field.samples", required=False, minimum=2, default=101),
        }

    def spectrum_settings(self, cavity: Optional[CavitySpec]) -> Dict[str, Any]:
        section = self.section(self.data, "spectrum", "spectrum")
        if section is None:
            return {}
        counts = section.get("counts")
        if not isinstance(counts, list) or not counts or not all(
            isinstance(c, int) and not isinstance(c, bool) and c >= 1 for c in counts
        ):
            self.error("spectrum.counts", "must be a nonempty list of positive integers")
            counts = None
        rabi = self.quantity(section, "rabi", "spectrum.rabi", "energy", minimum=0.0, strict=True)
        nu = self.section(section, "nu", "spectrum.nu")
        nu_min = nu_max = samples = None
        if nu is not None:
            nu_min = self.quantity(nu, "min", "spectrum.nu.min", "energy", minimum=None)
            nu_max = self.quantity(nu, "max", "spectrum.nu.max", "energy", minimum=None)
            samples = self.integer(nu, "samples", "spectrum.nu.samples", required=False, minimum=3)
            if nu_min is not None and nu_max is not None and nu_max <= nu_min:
                self.error("spectrum.nu.max", "must exceed spectrum.nu.min")
        method = self.choice(section, "method", "spectrum.method", ("analytic", "numeric"), default="analytic")
        cutoff = self.number(section, "cutoff", "spectrum.cutoff", required=False)
        if cutoff is not None and cutoff <= 0:
            self.error("spectrum.cutoff", f"must be > 0, got {cutoff}")
        convention = self.choice(section, "convention", "spectrum.convention", ("relative", "absolute"),
                                 default="relative")
        if convention == "absolute" and (cavity is None or cavity.frequency is None):
            self.error("cavity.frequency", "required for the absolute frequency convention")
        if method == "numeric" and cavity is not None and cavity.decay <= 0:
            self.error("cavity.decay", "numeric spectra need a nonzero cavity decay")
        return {
            "counts": counts,
            "rabi": rabi,
            "nu_min": nu_min,
            "nu_max": nu_max,
            "samples": samples,
            "method": method,
            "cutoff": cutoff,
            "convention": convention,
        }

    def block_settings(self) -> Dict[str, Any]:
        section = self.section(self.data, "block", "block")
        if section is None:
            return {}
        counts = section.get("counts")
        if not isinstance(counts, list) or not counts or not all(
            isinstance(c, int) and not isinstance(c, bool) and c >= 1 for c in counts
        ):
            self.error("block.counts", "must be a nonempty list of positive integers")
            counts = None
        total = self.integer(section, "total", "block.total", minimum=0)
        rabi = self.quantity(section, "rabi", "block.rabi", "energy", minimum=0.0, strict=True)
        entries = section.get("initial", ["pair-excited"])
        if not isinstance(entries, list):
            entries = [entries]
        initial = []
        for i, entry in enumerate(entries):
            path = f"block.initial[{i}]"
            if isinstance(entry, dict):
                amplitudes = self.block_amplitudes(entry, path, total)
                if amplitudes is not None:
                    initial.append((str(entry.get("label", f"explicit-{i + 1}")), amplitudes))
            elif entry in BLOCK_PRESETS:
                initial.append((entry, entry))
            else:
                self.error(path, f"must be one of {', '.join(BLOCK_PRESETS)} or a mapping of amplitudes, "
                                 f"got {entry!r}")
        return {"counts": counts, "total": total, "rabi": rabi, "initial": initial}

    def block_amplitudes(self, entry: Dict[str, Any], path: str,
                         total: Optional[int]) -> Optional[Dict[Tuple[int, Tuple[int, ...]], complex]]:
        """
        Explicit block state: a list of {photons, qubits, amplitude} entries

        Amplitudes are strings or numbers accepted by complex(); every entry
        must satisfy photons + len(qubits) = block.total.
        """
        rows = entry.get("amplitudes")
        if not isinstance(rows, list) or not rows:
            self.error(f"{path}.amplitudes", "must be a nonempty list")
            return None
        amplitudes: Dict[Tuple[int, Tuple[int, ...]], complex] = {}
        for k, row in enumerate(rows):
            row_path = f"{path}.amplitudes[{k}]"
            if not isinstance(row, dict):
                self.error(row_path, "must be a mapping")
                continue
            photons = self.integer(row, "photons", f"{row_path}.photons", required=False, default=0)
            qubits = row.get("qubits", [])
            if not isinstance(qubits, list) or not all(
                isinstance(q, int) and not isinstance(q, bool) and q >= 1 for q in qubits
            ):
                self.error(f"{row_path}.qubits", "must be a list of 1-based qubit labels")
                continue
            try:
                value = complex(str(row.get("amplitude", "")).replace(" ", ""))
            except ValueError:
                self.error(f"{row_path}.amplitude", f"cannot parse amplitude {row.get('amplitude')!r}")
                continue
            if photons is None:
                continue
            if total is not None and photons + len(qubits) != total:
                self.error(row_path, f"photons + qubits must equal block.total = {total}")
                continue
            amplitudes[(photons, tuple(sorted(qubits)))] = value
        if not amplitudes:
            return None
        norm = sum(abs(v) ** 2 for v in amplitudes.values())
        if abs(norm - 1.0) > 1e-6:
            self.error(f"{path}.amplitudes", f"squared amplitudes sum to {norm:.6g}, expected 1")
            return None
        return amplitudes

    def sse_settings(self, ensemble: Optional[QubitEnsemble]) -> Dict[str, Any]:
        section = self.section(self.data, "sse", "sse")
        if section is None:
            return {}
        trajectories = self.integer(section, "trajectories", "sse.trajectories", required=False, minimum=2)
        substeps = self.integer(section, "substeps", "sse.substeps", required=False, minimum=1, default=1)
        noise = None
        if section.get("dephasing_noise") is not None:
            noise = self.choice(section, "dephasing_noise", "sse.dephasing_noise", ("mean-square", "constant"))
        inelastic = self.quantity(section, "inelastic", "sse.inelastic", "energy", required=False) or 0.0
        elastic = self.quantity(section, "elastic", "sse.elastic", "energy", required=False) or 0.0
        relaxation = None
        if ensemble is not None:
            relaxation = RelaxationSpec.uniform(ensemble.count, inelastic=inelastic, elastic=elastic)
        if self.data.get("seed") is None:
            self.error("seed", "sse scenarios need a seed")
        return {
            "trajectories": trajectories,
            "substeps": substeps,
            "dephasing_noise": noise,
            "relaxation": relaxation,
        }
