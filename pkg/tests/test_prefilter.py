"""
Tests para el filtro k-strongest
"""

import math

import numpy as np
import pytest

from src.errors import ConfigError
from src.prefilter import FilterConfig, k_strongest_filter, k_strongest_mask, polar_to_cartesian
from src.sweep_io import PolarSweep


def test_tie_broken_toward_nearest_bin():
    """Test del ejemplo con empate en intensidad 80"""
    sweep = PolarSweep(np.array([[5.0, 80.0, 3.0, 90.0, 80.0]]), 1.0, 0.0, 0.25)
    cloud = k_strongest_filter(sweep, FilterConfig(k_strongest=2, z_min=10.0))
    assert cloud.xy[:, 0].tolist() == [1.0, 3.0]
    assert cloud.intensities.tolist() == [80.0, 90.0]
    assert cloud.azimuth_indices.tolist() == [0, 0]


def test_matches_brute_force_sort(rng):
    """Test contra el orden completo por fila"""
    intensities = rng.integers(0, 40, (10_000, 24)).astype(float)
    cfg = FilterConfig(k_strongest=5, z_min=12.0)
    mask = k_strongest_mask(intensities, cfg)
    for row, kept in zip(intensities, mask):
        expected = [j for j in sorted(range(len(row)), key=lambda j: (-row[j], j))[:5] if row[j] > 12.0]
        assert set(np.flatnonzero(kept)) == set(expected)


def test_all_below_threshold_gives_empty_cloud():
    """Test de barrido sin retornos útiles"""
    sweep = PolarSweep(np.full((4, 6), 10.0), 0.1, 0.0, 0.25)
    assert len(k_strongest_filter(sweep, FilterConfig(z_min=10.0))) == 0


def test_min_range_bin_excludes_near_bins():
    """Test de bins cercanos excluidos"""
    sweep = PolarSweep(np.array([[200.0, 150.0, 60.0, 70.0]]), 1.0, 0.0, 0.25)
    cloud = k_strongest_filter(sweep, FilterConfig(k_strongest=2, z_min=10.0, min_range_bin=2))
    assert cloud.xy[:, 0].tolist() == [2.0, 3.0]


@pytest.mark.parametrize("azimuth,expected", [
    (0, (4.38, 0.0)),
    (100, (0.0, 4.38)),
    (50, (4.38 * math.cos(math.pi / 4), 4.38 * math.sin(math.pi / 4))),
])
def test_polar_to_cartesian(azimuth, expected):
    """Test de conversión polar a cartesiana"""
    point = polar_to_cartesian(np.array([100]), np.array([azimuth]), 400, 0.0438)[0]
    assert point == pytest.approx(expected, abs=1e-12)
    if azimuth == 50:
        assert point[0] == pytest.approx(3.0971277, abs=1e-6)


def test_output_in_azimuth_then_range_order():
    """Test del orden de salida"""
    intensities = np.zeros((3, 5))
    intensities[2, 1] = intensities[0, 4] = intensities[0, 2] = 100.0
    cloud = k_strongest_filter(PolarSweep(intensities, 1.0, 0.0, 0.25), FilterConfig(k_strongest=3, z_min=50.0))
    assert cloud.azimuth_indices.tolist() == [0, 0, 2]
    assert np.hypot(cloud.xy[:, 0], cloud.xy[:, 1]) == pytest.approx([2.0, 4.0, 1.0])


def test_invalid_filter_config():
    """Test de configuración inválida"""
    with pytest.raises(ConfigError):
        FilterConfig(k_strongest=0)
