import json

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("quantum_frenet", max_examples=60, deadline=None)
settings.load_profile("quantum_frenet")


@pytest.fixture
def rng():
    return np.random.default_rng(20240521)


@pytest.fixture
def write_config(tmp_path):
    """Write a scenario dict as JSON and return its path."""
    def _write(data, name="scenario.json"):
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding="utf-8")
        return path
    return _write


@pytest.fixture
def rabi_config():
    return {
        "scenario": "rabi",
        "params": {"omega0": 1.0, "Omega0": 1.0, "omega": 0.9},
        "initial_state": {"theta": 3 * np.pi / 4, "phi": 0.0},
        "grid": {"t_max": 5.0, "steps": 500},
    }


@pytest.fixture
def qutrit_config():
    return {
        "scenario": "qutrit_demo",
        "params": {"omega0": 1.0, "Omega0": 0.5, "omega": 0.9},
        "grid": {"t_max": 2.0, "steps": 400},
    }
