#!/usr/bin/env python3
"""
DarkShield - dark-state shielding of qubit ensembles in lossy nanocavities
Command-line entry point
"""

import argparse
import copy
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import yaml

from darkshield import __version__
from darkshield.core.config import Config
from darkshield.core.exceptions import DarkShieldException, ScenarioValidationError
from darkshield.physics.field import APPROXIMATIONS
from darkshield.scenarios.runner import ScenarioRunner, check_kind
from darkshield.scenarios.scenario import (
    BLOCK_PRESETS,
    PRESET_SUFFIX,
    Scenario,
    list_presets,
    load_preset,
    load_scenario,
)
from darkshield.scenarios.worker import reproduce_all
from darkshield.storage.artifacts import ArtifactStore, write_csv
from darkshield.utils.logger import setup_logging

logger = logging.getLogger(__name__)

SCENARIO_COMMANDS = {
    "field": "Substrate field profiles (series, point and line approximations)",
    "evolve": "Single-excitation dynamics of an ensemble",
    "modes": "Normal modes of the single-excitation manifold",
    "inhomog": "Dynamics of an inhomogeneously broadened ensemble",
    "spectrum": "Cavity emission spectra",
    "block": "Multi-excitation block dynamics and dark populations",
    "sse": "Stochastic trajectories with relaxation and dephasing",
}

# Scenario used when a subcommand is given flags only
DEFAULT_PRESETS = {
    "field": "field",
    "evolve": "shielding",
    "modes": "broadening-modes",
    "inhomog": "broadening",
    "spectrum": "spectra",
    "block": "two-excitations",
    "sse": "sse-dephasing",
}


def _add_field_flags(sub: argparse.ArgumentParser) -> None:
    group = sub.add_argument_group("field parameters")
    group.add_argument("--z0", type=float, nargs="+", help="Sphere centre height(s) in units of the radius")
    group.add_argument("--approx", choices=APPROXIMATIONS, help="Emit a single E column for this approximation")
    group.add_argument("--terms", type=int, help="Number of image charges")
    group.add_argument("--rho-max", type=float, help="Largest substrate radius, in units of the sphere radius")
    group.add_argument("--samples", type=int, help="Number of radius samples")


def _add_spectrum_flags(sub: argparse.ArgumentParser) -> None:
    group = sub.add_argument_group("spectrum parameters")
    method = group.add_mutually_exclusive_group()
    method.add_argument("--analytic", dest="method", action="store_const", const="analytic",
                        help="Closed-form spectrum")
    method.add_argument("--numeric", dest="method", action="store_const", const="numeric",
                        help="Spectrum from the sampled photon amplitude")
    group.add_argument("--n-qubits", type=int, nargs="+", help="Ensemble size(s) N")
    group.add_argument("--rabi", help="Single-qubit Rabi energy (e.g. '50 meV')")
    group.add_argument("--mu", help="Cavity decay energy (e.g. '100 meV')")
    group.add_argument("--nu-range", nargs=2, metavar=("MIN", "MAX"), help="Frequency window (e.g. -600 600)")
    group.add_argument("--samples", type=int, help="Number of frequency samples")


def _add_block_flags(sub: argparse.ArgumentParser) -> None:
    group = sub.add_argument_group("block parameters")
    group.add_argument("--n-qubits", type=int, nargs="+", help="Ensemble size(s) N")
    group.add_argument("--m-photons", type=int, help="Excitation number M of the block")
    group.add_argument("--rabi", help="Single-qubit Rabi energy (e.g. '100 meV')")
    group.add_argument("--mu", help="Cavity decay energy (e.g. '33 meV')")
    group.add_argument("--initial", nargs="+", metavar="PRESET_OR_FILE",
                       help=f"Initial states: {', '.join(BLOCK_PRESETS)}, or a YAML file of amplitudes")


def _add_sse_flags(sub: argparse.ArgumentParser) -> None:
    group = sub.add_argument_group("stochastic parameters")
    group.add_argument("--trajectories", type=int, help="Number of trajectories")
    group.add_argument("--seed", type=int, help="Root seed of the trajectory ensemble")
    group.add_argument("--dt", help="Output time step (e.g. '0.5 fs'); replaces time.samples")
    group.add_argument("--inelastic", help="Qubit relaxation energy (e.g. '1 meV')")
    group.add_argument("--elastic", help="Qubit pure dephasing energy (e.g. '5 meV')")


COMMAND_FLAGS = {
    "field": _add_field_flags,
    "spectrum": _add_spectrum_flags,
    "block": _add_block_flags,
    "sse": _add_sse_flags,
}


def parse_arguments(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """Parse command line arguments"""
    parser = argparse.ArgumentParser(
        prog="darkshield",
        description="DarkShield - dark-state shielding of qubit ensembles in lossy nanocavities",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )

    parser.add_argument(
        "--version",
        action="version",
        version=f"DarkShield {__version__}",
    )

    parser.add_argument(
        "--config",
        "-c",
        type=Path,
        help="Path to configuration file",
    )

    parser.add_argument(
        "--log-level",
        "-l",
        choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"],
        help="Set logging level",
    )

    subparsers = parser.add_subparsers(dest="command", required=True)

    for name, help_text in SCENARIO_COMMANDS.items():
        sub = subparsers.add_parser(name, help=help_text)
        sub.add_argument(
            "scenario",
            nargs="?",
            default=DEFAULT_PRESETS[name],
            help=f"Scenario file, bundled preset name, or run directory/manifest to rerun "
                 f"(default: {DEFAULT_PRESETS[name]})",
        )
        sub.add_argument(
            "--output",
            "-o",
            type=Path,
            help="Write the CSV table here instead of stdout",
        )
        sub.add_argument(
            "--save",
            action="store_true",
            help="Also write a run directory with manifest under the output root",
        )
        sub.add_argument(
            "--output-dir",
            type=Path,
            help="Output root for --save (overrides configuration and environment)",
        )
        if name in COMMAND_FLAGS:
            COMMAND_FLAGS[name](sub)

    reproduce = subparsers.add_parser("reproduce-all", help="Run every bundled preset in parallel")
    reproduce.add_argument("--only", nargs="+", metavar="PRESET", help="Run only these presets")
    reproduce.add_argument("--output-dir", type=Path, help="Output root (one directory per preset)")

    subparsers.add_parser("presets", help="List bundled scenarios")

    verify = subparsers.add_parser("verify", help="Check the checksums of a run directory")
    verify.add_argument("run_dir", type=Path, help="Run directory containing manifest.json")

    return parser.parse_args(argv)


def resolve_scenario(reference: str) -> Scenario:
    """
    Load a scenario from a path, a manifest, or a bundled preset name

    Raises:
        ScenarioValidationError: If nothing matches or the file is invalid
    """
    path = Path(reference)
    if path.is_dir() or path.name == ArtifactStore.MANIFEST_FILE:
        return Scenario.from_manifest(path)
    if path.exists():
        return load_scenario(path)
    name = reference[: -len(PRESET_SUFFIX)] if reference.endswith(PRESET_SUFFIX) else reference
    if name in list_presets(include_aliases=True):
        return load_preset(name)
    raise ScenarioValidationError(
        f"No scenario file or preset named '{reference}'", [("scenario", "not found")]
    )


def _block_initial(entry: str) -> Any:
    """A block preset name, or the contents of an amplitude file"""
    if entry in BLOCK_PRESETS:
        return entry
    path = Path(entry)
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise ScenarioValidationError(
            f"'{entry}' is neither a block preset nor a readable file", [("block.initial", str(e))]
        ) from e
    except yaml.YAMLError as e:
        raise ScenarioValidationError(f"Invalid YAML in {path}", [("block.initial", str(e))]) from e
    if isinstance(data, list):
        data = {"amplitudes": data}
    if isinstance(data, dict):
        data.setdefault("label", path.stem)
    return data


def _set_decay(document: Dict[str, Any], mu: str) -> None:
    cavity = {k: v for k, v in (document.get("cavity") or {}).items() if k not in ("decay", "lifetime")}
    cavity["decay"] = mu
    document["cavity"] = cavity


def apply_overrides(command: str, document: Dict[str, Any], args: argparse.Namespace) -> bool:
    """
    Write command-line parameters into a scenario document

    Returns:
        True if any flag changed the document
    """
    def flag(name: str) -> Any:
        return getattr(args, name, None)

    def put(path: str, value: Any) -> None:
        *sections, leaf = path.split(".")
        node = document
        for part in sections:
            if not isinstance(node.get(part), dict):
                node[part] = {}
            node = node[part]
        node[leaf] = value

    changed = []
    if command == "field":
        for name, path in (("z0", "field.z0"), ("approx", "field.approximation"), ("terms", "field.terms"),
                           ("rho_max", "field.rho_max"), ("samples", "field.samples")):
            if flag(name) is not None:
                put(path, flag(name))
                changed.append(path)
    elif command == "spectrum":
        for name, path in (("method", "spectrum.method"), ("n_qubits", "spectrum.counts"),
                           ("rabi", "spectrum.rabi"), ("samples", "spectrum.nu.samples")):
            if flag(name) is not None:
                put(path, flag(name))
                changed.append(path)
        if flag("nu_range") is not None:
            low, high = flag("nu_range")
            put("spectrum.nu.min", low)
            put("spectrum.nu.max", high)
            changed.append("spectrum.nu")
    elif command == "block":
        for name, path in (("n_qubits", "block.counts"), ("m_photons", "block.total"), ("rabi", "block.rabi")):
            if flag(name) is not None:
                put(path, flag(name))
                changed.append(path)
        if flag("initial") is not None:
            put("block.initial", [_block_initial(entry) for entry in flag("initial")])
            changed.append("block.initial")
    elif command == "sse":
        for name, path in (("trajectories", "sse.trajectories"), ("seed", "seed"),
                           ("inelastic", "sse.inelastic"), ("elastic", "sse.elastic")):
            if flag(name) is not None:
                put(path, flag(name))
                changed.append(path)
        if flag("dt") is not None:
            put("time.step", flag("dt"))
            document["time"].pop("samples", None)
            changed.append("time.step")

    if command in ("spectrum", "block") and flag("mu") is not None:
        _set_decay(document, flag("mu"))
        changed.append("cavity.decay")

    if changed:
        logger.debug(f"Command-line overrides: {', '.join(changed)}")
    return bool(changed)


def run_command(args: argparse.Namespace, config: Config) -> int:
    """Run one scenario subcommand and emit its table"""
    scenario = resolve_scenario(args.scenario)
    check_kind(scenario, args.command)
    document = copy.deepcopy(scenario.parameters)
    if apply_overrides(args.command, document, args):
        scenario = Scenario.from_mapping(document)
    runner = ScenarioRunner(config)

    if args.save:
        output_dir = args.output_dir or config.get_output_dir()
        store = ArtifactStore(output_dir, config.get("output.float_format", "%.10e"))
        result = runner.run(scenario, store)
        logger.info(f"Run saved to {result.run_dir}")
    else:
        result = runner.compute(scenario)

    header = result.header(scenario.parameters)
    float_format = config.get("output.float_format", "%.10e")
    if args.output:
        args.output.parent.mkdir(parents=True, exist_ok=True)
        with open(args.output, "w", encoding="utf-8", newline="") as f:
            write_csv(f, result.table, header, float_format)
        logger.info(f"Table written to {args.output}")
    else:
        write_csv(sys.stdout, result.table, header, float_format)
    return 0


def presets_command() -> int:
    for name in list_presets():
        try:
            scenario = load_preset(name)
            print(f"{name}\t{scenario.kind}\t{scenario.description.strip()}")
        except DarkShieldException as e:
            print(f"{name}\tinvalid\t{e.message}")
    return 0


def reproduce_command(args: argparse.Namespace, config: Config) -> int:
    report = reproduce_all(config, names=args.only, output_dir=args.output_dir)
    print(json.dumps(
        {"success": report.success, "message": report.message, "results": report.results},
        indent=2, default=str,
    ))
    return 0 if report.success and all(r["success"] for r in report.results) else 1


def verify_command(args: argparse.Namespace) -> int:
    store = ArtifactStore(args.run_dir.parent)
    ok = store.verify(args.run_dir)
    print(json.dumps({"run_dir": str(args.run_dir), "verified": ok}))
    return 0 if ok else 1


def print_error(error: Exception) -> None:
    """Machine-readable error on stderr"""
    if isinstance(error, DarkShieldException):
        payload = error.to_dict()
    else:
        payload = {"error": type(error).__name__, "message": str(error), "details": None}
    print(json.dumps(payload, default=str), file=sys.stderr)


def main(argv: Optional[List[str]] = None) -> int:
    """Main application entry point"""
    args = parse_arguments(argv)

    # Load configuration
    config = Config(config_path=args.config)

    # Setup logging
    log_level = args.log_level or config.get("general.log_level", "INFO")
    log_file = config.get_log_file() if config.get("general.log_file") else None
    setup_logging(log_file=log_file, log_level=log_level)

    logger.debug(f"Starting DarkShield {__version__}")
    logger.debug(f"Configuration loaded from: {config.config_path or 'defaults'}")

    try:
        if args.command == "presets":
            status = presets_command()
        elif args.command == "reproduce-all":
            status = reproduce_command(args, config)
        elif args.command == "verify":
            status = verify_command(args)
        else:
            status = run_command(args, config)

    except KeyboardInterrupt:
        logger.info("Interrupted by user")
        status = 1

    except DarkShieldException as e:
        logger.error(f"{type(e).__name__}: {e.message}")
        print_error(e)
        status = 1

    except Exception as e:
        logger.critical(f"Fatal error: {e}", exc_info=True)
        print_error(e)
        status = 1

    return status


def cli() -> None:
    sys.exit(main())


if __name__ == "__main__":
    cli()
