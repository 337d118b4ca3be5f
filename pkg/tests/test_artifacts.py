"""
Tests for the artifact store and CSV writer
"""

import io
import json

import numpy as np
import pytest

from darkshield import __version__
from darkshield.storage.artifacts import ArtifactStore, parameters_hash, write_csv


@pytest.fixture
def store(tmp_path):
    return ArtifactStore(tmp_path / "runs", float_format="%.4e")


def _write_run(store, name="demo"):
    run_dir = store.run_directory(name)
    files = [
        store.write_table(run_dir, "demo.csv", {"t": [0.0, 1.0], "n": [1, 2]}, {"scenario": name}),
        store.write_json(run_dir, "summary.json", {"value": 1.5}),
    ]
    manifest = store.write_manifest(run_dir, {"name": name, "kind": "evolve"}, files, seed=7, wall_time=0.25)
    return run_dir, manifest


class TestWriteCsv:

    def test_header_and_formats(self):
        stream = io.StringIO()
        write_csv(
            stream,
            {"initial": ["a", "b"], "count": [3, 4], "t_fs": np.array([0.5, 1.25])},
            {"scenario": "demo", "kind": "evolve"},
            "%.3f",
        )
        lines = stream.getvalue().splitlines()
        assert lines == [
            "# scenario: demo",
            "# kind: evolve",
            "initial,count,t_fs",
            "a,3,0.500",
            "b,4,1.250",
        ]

    def test_numpy_integers_print_plain(self):
        stream = io.StringIO()
        write_csv(stream, {"mode": np.arange(2)})
        assert stream.getvalue().splitlines() == ["mode", "0", "1"]

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            write_csv(io.StringIO(), {"a": [1.0, 2.0], "b": [1.0]})


class TestParametersHash:

    def test_key_order_irrelevant(self):
        first = {"name": "x", "cavity": {"decay": "10 meV", "frequency": "1 eV"}}
        second = {"cavity": {"frequency": "1 eV", "decay": "10 meV"}, "name": "x"}
        assert parameters_hash(first) == parameters_hash(second)

    def test_values_matter(self):
        assert parameters_hash({"a": 1}) != parameters_hash({"a": 2})


class TestArtifactStore:

    def test_manifest_contents(self, store):
        run_dir, manifest = _write_run(store)
        on_disk = json.loads((run_dir / ArtifactStore.MANIFEST_FILE).read_text(encoding="utf-8"))

        assert on_disk["files"] == ["demo.csv", "summary.json"]
        assert set(on_disk["checksums"]) == {"demo.csv", "summary.json"}
        assert on_disk["seed"] == 7
        assert on_disk["version"] == __version__
        assert on_disk["parameters_sha256"] == parameters_hash({"name": "demo", "kind": "evolve"})
        assert "cpu_count" in on_disk["host"]
        assert manifest["checksums"] == on_disk["checksums"]

    def test_table_uses_store_format(self, store):
        run_dir, _ = _write_run(store)
        lines = (run_dir / "demo.csv").read_text(encoding="utf-8").splitlines()
        assert lines[0] == "# scenario: demo"
        assert lines[2] == "0.0000e+00,1"

    def test_verify_intact_run(self, store):
        run_dir, _ = _write_run(store)
        assert store.verify(run_dir)

    def test_verify_detects_tampering(self, store):
        run_dir, _ = _write_run(store)
        with open(run_dir / "summary.json", "a", encoding="utf-8") as f:
            f.write(" ")
        assert not store.verify(run_dir)

    def test_verify_detects_missing_file(self, store):
        run_dir, _ = _write_run(store)
        (run_dir / "demo.csv").unlink()
        assert not store.verify(run_dir)

    def test_verify_without_manifest(self, store):
        run_dir = store.run_directory("empty")
        assert not store.verify(run_dir)

    def test_list_runs(self, store):
        _write_run(store, "first")
        _write_run(store, "second")
        store.run_directory("no-manifest")

        runs = store.list_runs()
        assert {run["scenario"]["name"] for run in runs} == {"first", "second"}
        assert all("run_path" in run for run in runs)
        timestamps = [run["timestamp"] for run in runs]
        assert timestamps == sorted(timestamps, reverse=True)

    def test_list_runs_missing_base(self, tmp_path):
        assert ArtifactStore(tmp_path / "absent").list_runs() == []
