"""Shared fixtures for the hyperwitness test suite."""

import sys
from pathlib import Path

import numpy as np
import pytest

PROJECT_ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(PROJECT_ROOT / "src"))

from hyperwitness.simulation.qcore import density, hyper_state  # noqa: E402

TABLE_DIR = PROJECT_ROOT / "tables"
TABLE_FILE = TABLE_DIR / "vallone2009_table1.json"


@pytest.fixture
def rng():
    return np.random.default_rng(20090611)


@pytest.fixture(scope="session")
def ideal_state():
    return hyper_state(0.0, 0.0, 0.0)


@pytest.fixture(scope="session")
def ideal_density(ideal_state):
    return density(ideal_state)


@pytest.fixture(scope="session")
def table_path():
    return TABLE_FILE
