"""
Tests para la compensación de movimiento
"""

import math

import numpy as np
import pytest

from src.geometry import Velocity2D
from src.motion import azimuth_time_offsets, compensate
from src.prefilter import PointCloud2D


def _cloud(points, azimuths):
    points = np.asarray(points, dtype=float)
    return PointCloud2D(points, np.full(len(points), 100.0), np.asarray(azimuths))


def test_zero_velocity_is_identity():
    """Test sin movimiento"""
    cloud = _cloud([[1.0, 2.0], [3.0, -4.0]], [0, 7])
    assert np.array_equal(compensate(cloud, Velocity2D.zero(), 0.25, 400).xy, cloud.xy)


def test_center_azimuth_unchanged():
    """Test del acimut central del barrido"""
    cloud = _cloud([[5.0, 1.0]], [200])
    out = compensate(cloud, Velocity2D(3.0, -1.0, 0.5), 0.25, 400)
    assert out.xy[0] == pytest.approx([5.0, 1.0], abs=1e-15)


def test_constant_velocity_shift():
    """Test de desplazamiento con v=(2,0) en el primer acimut"""
    assert azimuth_time_offsets(np.array([0]), 400, 0.25)[0] == pytest.approx(-0.125)
    cloud = _cloud([[10.0, 0.0]], [0])
    out = compensate(cloud, Velocity2D(2.0, 0.0, 0.0), 0.25, 400)
    assert out.xy[0] == pytest.approx([9.75, 0.0], abs=1e-12)


def test_rotation_applied_with_angular_velocity():
    """Test de rotación por la velocidad angular"""
    cloud = _cloud([[10.0, 0.0]], [0])
    out = compensate(cloud, Velocity2D(0.0, 0.0, 1.0), 0.25, 400)
    angle = -0.125
    assert out.xy[0] == pytest.approx([10 * math.cos(angle), 10 * math.sin(angle)], abs=1e-12)


def test_intensity_and_azimuth_preserved():
    """Test de atributos conservados"""
    cloud = _cloud([[1.0, 1.0], [2.0, 2.0]], [3, 9])
    out = compensate(cloud, Velocity2D(1.0, 1.0, 0.2), 0.25, 16)
    assert np.array_equal(out.intensities, cloud.intensities)
    assert np.array_equal(out.azimuth_indices, cloud.azimuth_indices)


def _random_cloud(rng, count=200, azimuth_count=400):
    return _cloud(rng.uniform(-80.0, 80.0, (count, 2)), rng.integers(0, azimuth_count, count))


def test_opposite_velocity_restores_points_without_rotation(rng):
    """Test de compensar con v y luego con -v sin velocidad angular"""
    cloud = _random_cloud(rng)
    for _ in range(20):
        velocity = Velocity2D(*rng.uniform(-20.0, 20.0, 2), 0.0)
        forward = compensate(cloud, velocity, 0.25, 400)
        back = compensate(forward, -velocity, 0.25, 400)
        assert np.max(np.abs(back.xy - cloud.xy)) < 1e-9


def test_opposite_velocity_restores_points_with_rotation(rng):
    """Test de compensar con v y luego con -v con |w|*dT < 0.1"""
    sweep_duration = 0.25
    cloud = _random_cloud(rng)
    for _ in range(50):
        omega = rng.uniform(-0.099, 0.099) / sweep_duration
        velocity = Velocity2D(*rng.uniform(-20.0, 20.0, 2), omega)
        forward = compensate(cloud, velocity, sweep_duration, 400)
        back = compensate(forward, -velocity, sweep_duration, 400)
        assert np.max(np.abs(back.xy - cloud.xy)) < 1e-6
        assert np.any(np.abs(forward.xy - cloud.xy) > 1e-3)


def test_translation_follows_constant_velocity_arc():
    """Test de traslación sobre el arco de velocidad constante"""
    cloud = _cloud([[0.0, 0.0]], [0])
    velocity = Velocity2D(2.0, 0.0, 4.0)
    out = compensate(cloud, velocity, 0.25, 400)
    phi = -0.125 * 4.0
    # origen de un marco que avanza 2 m/s girando 4 rad/s durante -0.125 s
    expected = [-0.25 * math.sin(phi) / phi, -0.25 * (1 - math.cos(phi)) / phi]
    assert out.xy[0] == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("azimuth_count,sweep_duration", [(1, 0.25), (64, 0.1), (400, 0.25), (401, 1.0)])
def test_time_offsets_within_half_sweep(azimuth_count, sweep_duration):
    """Test de desfases dentro de [-dT/2, dT/2] para todos los acimuts"""
    offsets = azimuth_time_offsets(np.arange(azimuth_count), azimuth_count, sweep_duration)
    assert np.all(offsets >= -sweep_duration / 2)
    assert np.all(offsets <= sweep_duration / 2)
    assert offsets[0] == pytest.approx(-sweep_duration / 2)
    assert np.all(np.diff(offsets) > 0)
