"""
Tests for scenario loading, execution and batch reproduction
"""

import numpy as np
import pytest
import yaml

from darkshield.core.config import OUTPUT_DIR_ENV
from darkshield.core.exceptions import ScenarioValidationError
from darkshield.core.units import HBAR
from darkshield.scenarios.runner import ScenarioRunner, check_kind, run_scenario
from darkshield.scenarios.scenario import (
    Scenario,
    golden_detunings,
    list_presets,
    load_preset,
    load_scenario,
    preset_path,
)
from darkshield.scenarios.worker import reproduce_all
from darkshield.storage.artifacts import ArtifactStore

BUNDLED = {
    "field", "shielding", "broadening", "broadening-modes", "rabi-sweep", "two-excitations", "ensemble-size",
    "spectra", "spectra-numeric", "sse-dephasing",
}


def _broadened_mapping():
    """41 equal couplings, uniform detunings over +-50 meV, two collective Rabi energies"""
    return {
        "name": "broadened",
        "kind": "inhomog",
        "cavity": {"lifetime": "20 fs"},
        "ensemble": {
            "count": 41,
            "rabi": "10 meV",
            "collective_rabi": "540 meV",
            "detunings": {"distribution": "uniform", "half_width": "50 meV", "seed": 0},
        },
        "initial": {"label": "centre-qubit", "preset": "qubit", "qubit": 1},
        "time": {"end": "1000 /mu", "samples": 401},
        "sweep": {"collective_rabi": ["540 meV", "27 meV"]},
    }


def _broadening_draw(seed):
    """The broadening preset with another detuning seed, swept to the weak-coupling Omega_N"""
    data = yaml.safe_load(preset_path("broadening").read_text(encoding="utf-8"))
    data["ensemble"]["detunings"]["seed"] = seed
    data["time"]["samples"] = 401
    data["sweep"] = {"collective_rabi": ["540 meV", "27 meV"]}
    return data


def _field_of(error):
    return {entry["field"] for entry in error.details}


class TestPresets:

    def test_bundled_names(self):
        assert BUNDLED <= set(list_presets())

    @pytest.mark.parametrize("name", sorted(BUNDLED))
    def test_preset_loads(self, name):
        scenario = load_preset(name)
        assert scenario.name == name
        assert scenario.description

    def test_shielding_resolution(self):
        scenario = load_preset("shielding")
        assert scenario.kind == "evolve"
        assert scenario.ensemble.count == 21
        assert abs(scenario.ensemble.rabi[0]) == pytest.approx(120.0)
        assert scenario.mu == pytest.approx(HBAR / 20.0)
        assert scenario.times[-1] == pytest.approx(500.0)
        assert [label for label, _ in scenario.initial] == ["centre-qubit", "bright"]

    def test_broadening_detunings(self):
        scenario = load_preset("broadening")
        detunings = scenario.ensemble.detunings
        expected = np.random.default_rng(0).uniform(-50.0, 50.0, 41)
        np.testing.assert_array_equal(detunings, expected)
        assert np.array_equal(load_preset("broadening").ensemble.detunings, detunings)
        assert scenario.ensemble.collective_rabi == pytest.approx(540.0)
        assert scenario.times[-1] == pytest.approx(1000 * 20.0)

    @pytest.mark.parametrize("alias,name", [("fig2", "shielding"), ("fig3", "broadening")])
    def test_preset_aliases(self, alias, name):
        scenario = load_preset(alias)
        assert scenario.name == name
        assert load_preset(f"{alias}.scenario").parameters == scenario.parameters
        assert alias in list_presets(include_aliases=True)
        assert alias not in list_presets()

    def test_alias_contents(self):
        shielding = load_preset("fig2")
        assert shielding.ensemble.count == 21
        assert abs(shielding.ensemble.rabi[0]) == pytest.approx(120.0)
        assert shielding.mu == pytest.approx(HBAR / 20.0)
        broadening = load_preset("fig3")
        assert broadening.ensemble.count == 41
        assert np.max(np.abs(broadening.ensemble.detunings)) <= 50.0
        assert broadening.parameters["ensemble"]["detunings"]["seed"] == 0

    def test_unknown_preset(self):
        with pytest.raises(ScenarioValidationError):
            load_preset("no-such-preset")


class TestValidation:

    def test_missing_decay(self):
        data = _broadened_mapping()
        data["cavity"] = {}
        with pytest.raises(ScenarioValidationError) as excinfo:
            Scenario.from_mapping(data)
        assert "cavity.decay" in _field_of(excinfo.value)

    def test_collects_every_error(self):
        data = _broadened_mapping()
        del data["name"]
        data["time"]["samples"] = 1
        data["ensemble"]["detunings"]["distribution"] = "lorentzian"
        with pytest.raises(ScenarioValidationError) as excinfo:
            Scenario.from_mapping(data)
        fields = _field_of(excinfo.value)
        assert {"name", "time.samples", "ensemble.detunings.distribution"} <= fields

    def test_unknown_kind(self):
        with pytest.raises(ScenarioValidationError) as excinfo:
            Scenario.from_mapping({"name": "x", "kind": "teleport"})
        assert "kind" in _field_of(excinfo.value)

    def test_not_a_mapping(self):
        with pytest.raises(ScenarioValidationError):
            Scenario.from_mapping(["not", "a", "mapping"])

    def test_rabi_count_mismatch(self):
        data = _broadened_mapping()
        data["ensemble"]["rabi"] = ["10 meV", "20 meV"]
        with pytest.raises(ScenarioValidationError) as excinfo:
            Scenario.from_mapping(data)
        assert "ensemble.rabi" in _field_of(excinfo.value)

    def test_sse_needs_seed(self):
        data = yaml.safe_load(preset_path("sse-dephasing").read_text(encoding="utf-8"))
        del data["seed"]
        with pytest.raises(ScenarioValidationError) as excinfo:
            Scenario.from_mapping(data)
        assert "seed" in _field_of(excinfo.value)

    def test_absolute_convention_needs_frequency(self):
        data = yaml.safe_load(preset_path("spectra").read_text(encoding="utf-8"))
        data["spectrum"]["convention"] = "absolute"
        with pytest.raises(ScenarioValidationError) as excinfo:
            Scenario.from_mapping(data)
        assert "cavity.frequency" in _field_of(excinfo.value)

    def test_invalid_yaml(self, tmp_path):
        path = tmp_path / "broken.scenario"
        path.write_text("name: [unclosed\n", encoding="utf-8")
        with pytest.raises(ScenarioValidationError):
            load_scenario(path)

    def test_check_kind(self):
        scenario = load_preset("shielding")
        check_kind(scenario, "evolve")
        with pytest.raises(ScenarioValidationError):
            check_kind(scenario, "spectrum")


class TestGoldenDetunings:

    def test_range_and_centre(self):
        values = golden_detunings(101, 50.0)
        assert values[0] == pytest.approx(0.0)
        assert np.all(values >= -50.0) and np.all(values < 50.0)
        assert np.unique(values).size == values.size

    def test_even_coverage(self):
        values = golden_detunings(1000, 1.0)
        counts, _ = np.histogram(values, bins=10, range=(-1.0, 1.0))
        assert counts.min() >= 95 and counts.max() <= 105

    def test_seed_shifts_sequence(self):
        assert np.allclose(golden_detunings(5, 1.0, seed=3), golden_detunings(8, 1.0)[3:])


class TestRunner:

    def test_shielding_plateau(self, config):
        scenario = load_preset("shielding")
        result = ScenarioRunner(config).compute(scenario)
        rabi = scenario.ensemble.rabi
        expected = 1.0 - abs(rabi[0]) ** 2 / np.sum(np.abs(rabi) ** 2)

        centre = result.summary["initial"]["centre-qubit"]
        assert centre["retained_resonant"] == pytest.approx(expected)
        assert centre["final_qubit_population"] == pytest.approx(expected, abs=1e-3)
        assert result.summary["initial"]["bright"]["final_qubit_population"] < 1e-3
        assert len(result.table["t_fs"]) == 2 * 501

    def test_broadening_sweep(self, config):
        scenario = Scenario.from_mapping(_broadened_mapping())
        result = ScenarioRunner(config).compute(scenario)
        strong, weak = result.summary["runs"]
        strong_final = strong["initial"]["centre-qubit"]["final_qubit_population"]
        weak_final = weak["initial"]["centre-qubit"]["final_qubit_population"]

        assert strong["collective_rabi"] == pytest.approx(540.0)
        assert weak_final <= strong_final - 0.1
        assert "regime" in strong

    @pytest.mark.parametrize("seed", range(5))
    def test_broadening_keeps_dark_population_across_draws(self, config, seed):
        scenario = Scenario.from_mapping(_broadening_draw(seed))
        result = ScenarioRunner(config).compute(scenario)
        strong, weak = result.summary["runs"]
        centre = strong["initial"]["centre-qubit"]
        plateau = centre["retained_resonant"]

        table = result.table
        rabi_column = np.asarray(table["collective_rabi"])
        t = np.asarray(table["t_fs"])
        qubits = np.asarray(table["qubits"])
        window = np.isclose(rabi_column, 540.0) & (t >= 20.0 * HBAR / scenario.mu)
        # slow residual decay of the dark modes over 10^3 / mu costs a few percent
        assert qubits[window].min() >= plateau - 0.08
        assert qubits[window].max() <= 1.0 + 1e-9
        assert weak["initial"]["centre-qubit"]["final_qubit_population"] <= centre["final_qubit_population"] - 0.1

    def test_broadening_mean_over_draws(self, config):
        runner = ScenarioRunner(config)
        finals = []
        plateaus = []
        for seed in range(5):
            result = runner.compute(Scenario.from_mapping(_broadening_draw(seed)))
            centre = result.summary["runs"][0]["initial"]["centre-qubit"]
            finals.append(centre["final_qubit_population"])
            plateaus.append(centre["retained_resonant"])
        assert np.allclose(plateaus, plateaus[0])
        assert plateaus[0] < 1.0 - 1.0 / 41
        assert np.mean(finals) >= plateaus[0] - 0.07
        assert max(finals) < 1.0

    def test_trajectory_columns(self, config):
        scenario = load_preset("shielding")
        result = ScenarioRunner(config).compute(scenario)
        table = result.table
        count = scenario.ensemble.count
        qubit_columns = [f"q{j}" for j in range(1, count + 1)]
        assert list(table) == ["initial", "t_fs", "photon", *qubit_columns, "qubits", "re_f", "im_f", "norm"]

        populations = np.column_stack([table[name] for name in qubit_columns])
        np.testing.assert_allclose(populations.sum(axis=1), table["qubits"], atol=1e-12)
        assert table["q1"][0] == pytest.approx(1.0)
        assert table["re_f"][0] == pytest.approx(scenario.ensemble.rabi[0].real)
        assert table["im_f"][0] == pytest.approx(0.0, abs=1e-12)

    def test_inhomog_columns_carry_sweep(self, config):
        scenario = Scenario.from_mapping(_broadened_mapping())
        table = ScenarioRunner(config).compute(scenario).table
        assert list(table)[:3] == ["collective_rabi", "initial", "t_fs"]
        assert {"q1", "q41", "re_f", "im_f"} <= set(table)
        assert "q42" not in table

    def test_block_retained_fraction(self, config):
        result = ScenarioRunner(config).compute(load_preset("two-excitations"))
        table = result.table
        assert list(table)[:6] == ["count", "initial", "t_fs", "dark", "retained", "norm"]
        runs = {run["initial"]: run for run in result.summary["runs"]}
        assert runs["pair-excited"]["retained_fraction"] == pytest.approx(1.0 / 3.0, abs=1e-3)
        assert runs["symmetric"]["retained_fraction"] < 1e-3
        np.testing.assert_allclose(table["retained"], table["dark"], atol=1e-12)

    def test_block_explicit_amplitudes(self, config):
        data = yaml.safe_load(preset_path("two-excitations").read_text(encoding="utf-8"))
        data["block"]["initial"] = [{
            "label": "split-pair",
            "amplitudes": [
                {"qubits": [1, 2], "amplitude": 0.7071067811865476},
                {"qubits": [3, 4], "amplitude": 0.7071067811865476},
            ],
        }]
        result = ScenarioRunner(config).compute(Scenario.from_mapping(data))
        run = result.summary["runs"][0]
        assert run["initial"] == "split-pair"
        assert run["retained_fraction"] == pytest.approx(2.0 / 3.0, abs=1e-3)

    def test_modes_trace(self, config):
        result = ScenarioRunner(config).compute(load_preset("broadening-modes"))
        assert result.summary["trace_error"] < 1e-6
        assert len(result.table["mode"]) == result.summary["count"] + 1

    def test_spectra_peaks(self, config):
        result = ScenarioRunner(config).compute(load_preset("spectra"))
        peaks = result.summary["counts"]["5"]["peaks"]
        expected = 50.0 * np.sqrt(4.5)
        assert any(abs(p["position"] - expected) < 0.5 for p in peaks)
        assert any(abs(p["position"] + expected) < 0.5 for p in peaks)

    def test_field_summary(self, config):
        result = ScenarioRunner(config).compute(load_preset("field"))
        far = result.summary["z0"]["11.0"]
        assert far["point_max_relative_deviation"] < 1e-3
        assert len(result.table["rho"]) == 3 * 101


class TestArtifacts:

    def test_rerun_is_byte_identical(self, config, tmp_path):
        scenario = load_preset("shielding")
        first = run_scenario(scenario, config, ArtifactStore(tmp_path / "a"))
        second = run_scenario(scenario, config, ArtifactStore(tmp_path / "b"))

        for name in ("evolve.csv", "summary.json"):
            assert (first.run_dir / name).read_bytes() == (second.run_dir / name).read_bytes()

    def test_manifest_round_trip(self, config, tmp_path):
        scenario = load_preset("shielding")
        result = run_scenario(scenario, config, ArtifactStore(tmp_path))
        assert ArtifactStore(tmp_path).verify(result.run_dir)

        rebuilt = Scenario.from_manifest(result.run_dir)
        assert rebuilt.parameters == scenario.parameters
        assert np.allclose(rebuilt.ensemble.rabi, scenario.ensemble.rabi)

    def test_default_store_uses_config(self, config, tmp_path, monkeypatch):
        monkeypatch.delenv(OUTPUT_DIR_ENV, raising=False)
        result = run_scenario(load_preset("field"), config)
        assert result.run_dir.resolve() == (tmp_path / "runs" / "field").resolve()
        assert (result.run_dir / ArtifactStore.MANIFEST_FILE).exists()

    def test_manifest_missing(self, tmp_path):
        with pytest.raises(ScenarioValidationError):
            Scenario.from_manifest(tmp_path)


class TestReproduceAll:

    def test_subset(self, config, tmp_path):
        report = reproduce_all(config, names=["field", "spectra"], output_dir=tmp_path / "batch")
        assert report.success
        assert [r["name"] for r in report.results] == ["field", "spectra"]
        assert all(r["success"] for r in report.results)
        store = ArtifactStore(tmp_path / "batch")
        assert all(store.verify(tmp_path / "batch" / name) for name in ("field", "spectra"))

    def test_failure_is_reported(self, config, tmp_path):
        report = reproduce_all(config, names=["no-such-preset"], output_dir=tmp_path / "batch")
        assert not report.success
        assert report.results[0]["success"] is False
        assert "error" in report.results[0]

    def test_empty(self, config, tmp_path):
        report = reproduce_all(config, names=[], output_dir=tmp_path)
        assert not report.success
