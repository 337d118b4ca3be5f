"""
Shared fixtures
"""

import numpy as np
import pytest
import yaml

from darkshield.core.config import Config
from darkshield.core.model import QubitEnsemble, SingleExcitationState
from darkshield.physics.field import SphereGeometry, rabi_profile, substrate_positions

SHIELDING_COUNT = 21


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def shielding_rabi():
    """Line-charge profile at z0 = 1.2, 120 meV at the centre, 21 qubits"""
    return rabi_profile(SphereGeometry(1.2), "line", 120.0, substrate_positions(SHIELDING_COUNT, 1.0))


@pytest.fixture
def shielding_ensemble(shielding_rabi):
    return QubitEnsemble(detunings=np.zeros(SHIELDING_COUNT), rabi=shielding_rabi)


@pytest.fixture
def config_file(tmp_path):
    """Configuration writing runs and logs inside tmp_path"""
    path = tmp_path / "config.yml"
    data = {
        "general": {"log_file": "", "log_level": "WARNING", "max_concurrent_jobs": 1},
        "output": {"directory": str(tmp_path / "runs")},
    }
    path.write_text(yaml.safe_dump(data), encoding="utf-8")
    return path


@pytest.fixture
def config(config_file):
    return Config(config_path=config_file)


def _random_state(rng, count, photon=True):
    """Normalised single-excitation state with random complex amplitudes"""
    c0 = rng.normal(size=count) + 1j * rng.normal(size=count)
    c10 = complex(rng.normal(), rng.normal()) if photon else 0.0
    scale = np.sqrt(np.sum(np.abs(c0) ** 2) + abs(c10) ** 2)
    return SingleExcitationState(c00=0.0, c10=c10 / scale, c0=c0 / scale)


def _random_rabi(rng, count, low=5.0, high=60.0):
    return rng.uniform(low, high, count) * np.exp(1j * rng.uniform(0, 2 * np.pi, count))


@pytest.fixture
def random_state(rng):
    """Factory: random_state(count, photon=True)"""
    return lambda count, photon=True: _random_state(rng, count, photon)


@pytest.fixture
def random_rabi(rng):
    """Factory: random_rabi(count, low=5, high=60) with random phases"""
    return lambda count, low=5.0, high=60.0: _random_rabi(rng, count, low, high)
