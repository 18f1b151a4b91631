"""
Fixtures compartidas por las pruebas
"""

import numpy as np
import pytest

from src.simulator import SimConfig, World, rectangular_loop_world
from src.surface import SurfacePointSet


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="ejecutar las pruebas marcadas como slow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="prueba lenta: usar --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


def lattice_scene(rng: np.random.Generator, spacing: float = 4.0, side: int = 8, jitter: float = 0.5,
                  resolution: float = 1.0) -> SurfacePointSet:
    """Medias en una retícula perturbada, normales y conteos aleatorios"""
    ticks = (np.arange(side) - (side - 1) / 2) * spacing
    gx, gy = np.meshgrid(ticks, ticks, indexing="ij")
    means = np.column_stack([gx.ravel(), gy.ravel()]) + rng.uniform(-jitter, jitter, (side * side, 2))
    angles = rng.uniform(-np.pi, np.pi, len(means))
    normals = np.column_stack([np.cos(angles), np.sin(angles)])
    counts = rng.integers(2, 20, len(means))
    return SurfacePointSet.from_arrays(means, normals, resolution, counts=counts)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def scene(rng):
    return lattice_scene(rng)


@pytest.fixture
def quiet_sim_config():
    """Sensor pequeño y sin ruido"""
    return SimConfig(azimuth_count=200, range_bin_count=400, range_resolution_m=0.1,
                     sweep_duration_s=0.25, noise_std=0.0, speckle_prob=0.0, seed=7)


@pytest.fixture
def box_world() -> World:
    """Paneles alrededor del origen: caja interior 22 x 12 m y exterior 38 x 28 m"""
    return rectangular_loop_world(width=30.0, height=20.0, corridor_half_width=4.0)
