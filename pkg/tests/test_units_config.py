"""
Tests for unit parsing and configuration
"""

import pytest

from darkshield.core.config import OUTPUT_DIR_ENV, Config, deep_merge
from darkshield.core.exceptions import ConfigurationError, DomainError
from darkshield.core.units import (
    HBAR,
    energy_to_lifetime,
    energy_to_rate,
    lifetime_to_energy,
    parse_quantity,
    rate_to_energy,
)


class TestUnits:

    def test_lifetime_round_trip(self):
        mu = lifetime_to_energy(20.0)
        assert mu == pytest.approx(HBAR / 20.0)
        assert energy_to_lifetime(mu) == pytest.approx(20.0)

    def test_rate_conversion(self):
        assert energy_to_rate(HBAR) == pytest.approx(1.0)
        assert rate_to_energy(0.5) == pytest.approx(HBAR / 2)

    @pytest.mark.parametrize("text,kind,expected", [
        ("120 meV", "energy", 120.0),
        ("0.54 eV", "energy", 540.0),
        ("500 ueV", "energy", 0.5),
        ("500 µeV", "energy", 0.5),
        ("20 fs", "time", 20.0),
        ("0.5 ps", "time", 500.0),
        ("2ns", "time", 2e6),
        (42, "time", 42.0),
        ("7", "energy", 7.0),
    ])
    def test_parse_quantity(self, text, kind, expected):
        assert parse_quantity(text, kind) == pytest.approx(expected)

    def test_parse_inverse_decay_units(self):
        mu = HBAR / 20.0
        assert parse_quantity("25 /mu", "time", decay=mu) == pytest.approx(500.0)

    @pytest.mark.parametrize("text,kind,decay", [
        ("25 /mu", "time", None),
        ("25 /mu", "time", 0.0),
        ("3 meV", "time", None),
        ("3 fs", "energy", None),
        ("fast", "time", None),
        (True, "energy", None),
    ])
    def test_parse_rejects(self, text, kind, decay):
        with pytest.raises(DomainError):
            parse_quantity(text, kind, decay=decay)

    def test_nonpositive_lifetime(self):
        with pytest.raises(DomainError):
            lifetime_to_energy(0.0)


class TestConfig:

    def test_defaults_without_file(self, tmp_path, monkeypatch):
        monkeypatch.setattr(Config, "DEFAULT_CONFIG_PATHS", [tmp_path / "missing.yml"])
        config = Config()
        assert config.get("field.terms") == 20
        assert config.get("sse.dephasing_noise") == "mean-square"
        assert config.get("nothing.here", "fallback") == "fallback"
        assert config.numerics() == {"method": "DOP853", "rtol": 1e-10, "atol": 1e-12}

    def test_file_overrides_merge_with_defaults(self, config):
        assert config.get("general.max_concurrent_jobs") == 1
        assert config.get("general.log_file") == ""
        assert config.get("spectrum.cutoff") == 40.0

    def test_set_and_save(self, config, tmp_path):
        config.set("sse.trajectories", 50)
        config.set("extra.nested.value", 3)
        target = tmp_path / "saved.yml"
        config.save(target)
        reloaded = Config(config_path=target)
        assert reloaded.get("sse.trajectories") == 50
        assert reloaded.get("extra.nested.value") == 3

    def test_output_dir_environment_wins(self, config, tmp_path, monkeypatch):
        monkeypatch.delenv(OUTPUT_DIR_ENV, raising=False)
        assert config.get_output_dir() == (tmp_path / "runs").resolve()
        monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path / "elsewhere"))
        assert config.get_output_dir() == (tmp_path / "elsewhere").resolve()

    def test_broken_file_falls_back_to_defaults(self, tmp_path):
        path = tmp_path / "broken.yml"
        path.write_text("general: [unclosed", encoding="utf-8")
        config = Config(config_path=path)
        assert config.get("general.max_concurrent_jobs") == 2

    def test_non_mapping_file_is_ignored(self, tmp_path):
        path = tmp_path / "list.yml"
        path.write_text("- 1\n- 2\n", encoding="utf-8")
        config = Config(config_path=path)
        assert config.get("field.terms") == 20

    @pytest.mark.parametrize("key,value,field", [
        ("numerics.method", "Euler", "numerics.method"),
        ("numerics.rtol", 0, "numerics.rtol"),
        ("numerics.atol", "tight", "numerics.atol"),
    ])
    def test_numerics_rejects_bad_values(self, config, key, value, field):
        config.set(key, value)
        with pytest.raises(ConfigurationError) as excinfo:
            config.numerics()
        assert excinfo.value.details["field"] == field

    def test_numerics_accepts_string_tolerances(self, config):
        config.set("numerics.method", "Radau")
        config.set("numerics.rtol", "1e-8")
        assert config.numerics() == {"method": "Radau", "rtol": 1e-8, "atol": 1e-12}


def test_deep_merge_keeps_sibling_keys():
    merged = deep_merge({"a": {"x": 1, "y": 2}, "b": 3}, {"a": {"y": 5}, "c": 4})
    assert merged == {"a": {"x": 1, "y": 5}, "b": 3, "c": 4}
