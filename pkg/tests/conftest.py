# tests/conftest.py
from pathlib import Path

import numpy as np
import pytest

from app.core.standards import table1_scenario

SEED = 20240611
SCENARIO_DIR = Path(__file__).resolve().parents[1] / "scenarios"


@pytest.fixture
def table1():
    """Reference scenario: lambda = mu = 25, h_a = 20 km, Rayleigh fading."""
    return table1_scenario()


@pytest.fixture
def no_platform(table1):
    return table1.updated(platform_enabled=False)


@pytest.fixture
def rng():
    return np.random.default_rng(SEED)


@pytest.fixture
def table1_path():
    return SCENARIO_DIR / "table1.env"
