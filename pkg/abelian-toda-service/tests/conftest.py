"""
Pytest configuration and shared fixtures for abelian Toda service tests.

This module provides common test fixtures: temporary directories, a sample
experiment configuration, seeded random generators and the lattice and period
data reused across test modules.
"""

import shutil
import tempfile
from pathlib import Path

import numpy as np
import pytest
import yaml

from config_manager import ConfigManager
from special.theta import RiemannMatrix
from special.weierstrass import EllipticLattice

OMEGA1 = 0.5
OMEGA2 = 0.1 + 0.55j


def pair(value: complex) -> list:
    return [float(np.real(value)), float(np.imag(value))]


@pytest.fixture
def temp_dir():
    """Create a temporary directory for test output."""
    temp_path = Path(tempfile.mkdtemp())
    yield temp_path
    shutil.rmtree(temp_path, ignore_errors=True)


@pytest.fixture
def sample_config_data():
    """Minimal valid experiment configuration as a dictionary."""
    return {
        "schema_version": 1,
        "seed": 7,
        "lattice": {"omega1": pair(OMEGA1), "omega2": pair(OMEGA2)},
        "numerics": {"depth": 6, "t_nodes": 24},
        "secancy": {
            "A": [pair(0.23 + 0.11j)],
            "U": [pair(0.17 - 0.08j)],
            "V": [pair(0.61 + 0.2j)],
            "W": [pair(0.13 + 0.05j)],
        },
        "rsdyn": {
            "positions": [pair(0.1 + 0.05j), pair(-0.12 + 0.2j)],
            "velocities": [pair(0.6 + 0.1j), pair(-0.3 + 0.25j)],
        },
    }


@pytest.fixture
def sample_config(temp_dir, sample_config_data):
    """Write the sample configuration to a YAML file."""
    config_file = temp_dir / "test_config.yaml"
    with open(config_file, "w") as f:
        yaml.dump(sample_config_data, f)
    return config_file


@pytest.fixture
def config_manager(sample_config):
    """ConfigManager over the sample configuration."""
    return ConfigManager(sample_config)


@pytest.fixture
def rng():
    """Seeded random generator so every test run is reproducible."""
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def lattice():
    """Generic genus-one lattice shared by elliptic tests."""
    return EllipticLattice(OMEGA1, OMEGA2)


@pytest.fixture(scope="session")
def riemann_g1():
    return RiemannMatrix([[1j]])


@pytest.fixture(scope="session")
def riemann_g2():
    """Generic genus-two Riemann matrix."""
    return RiemannMatrix([[0.3 + 1.1j, 0.2 + 0.35j], [0.2 + 0.35j, -0.15 + 0.9j]])


@pytest.fixture(scope="session")
def riemann_g3():
    return RiemannMatrix(
        [
            [0.1 + 1.2j, 0.2 + 0.3j, -0.1 + 0.1j],
            [0.2 + 0.3j, -0.3 + 1.0j, 0.15 + 0.2j],
            [-0.1 + 0.1j, 0.15 + 0.2j, 0.05 + 0.95j],
        ]
    )
