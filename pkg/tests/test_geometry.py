"""
Tests para las utilidades de SE(2)
"""

import math

import numpy as np
import pytest

from src.geometry import Pose2D, Velocity2D, fit_rigid_transform, normalize_angle


def test_normalize_angle_range():
    """Test de normalización a (-pi, pi]"""
    assert normalize_angle(3 * math.pi) == pytest.approx(math.pi)
    assert normalize_angle(-math.pi / 2) == pytest.approx(-math.pi / 2)
    assert normalize_angle(2 * math.pi + 0.1) == pytest.approx(0.1)


def test_compose_and_inverse():
    """Test de composición con la inversa"""
    pose = Pose2D(1.0, -2.0, 0.7)
    identity = pose.compose(pose.inverse())
    assert identity.as_vector() == pytest.approx([0.0, 0.0, 0.0], abs=1e-12)


def test_between_is_relative_pose():
    """Test de pose relativa a^-1 ∘ b"""
    a = Pose2D(2.0, 1.0, math.pi / 2)
    b = Pose2D(2.0, 3.0, math.pi / 2)
    assert a.between(b).as_vector() == pytest.approx([2.0, 0.0, 0.0], abs=1e-12)


def test_matrix_round_trip():
    """Test de conversión a matriz homogénea"""
    pose = Pose2D(0.3, 0.4, -1.2)
    assert Pose2D.from_matrix(pose.as_matrix()).as_vector() == pytest.approx(pose.as_vector())


def test_fit_rigid_transform_recovers_pose(rng):
    """Test de alineación cerrada entre nubes"""
    source = rng.uniform(-10, 10, (30, 2))
    truth = Pose2D(1.5, -0.5, 0.3)
    estimate = fit_rigid_transform(source, truth.transform_points(source))
    assert estimate.as_vector() == pytest.approx(truth.as_vector(), abs=1e-12)


def test_velocity_rejects_non_finite():
    """Test de velocidad no finita"""
    with pytest.raises(ValueError):
        Velocity2D(math.nan, 0.0, 0.0)


def test_velocity_from_relative_pose():
    """Test de velocidad de primer orden"""
    velocity = Velocity2D.from_relative_pose(Pose2D(0.5, 0.0, 0.1), 0.25)
    assert (velocity.vx, velocity.vy, velocity.omega) == pytest.approx((2.0, 0.0, 0.4))
    assert np.isclose(velocity.displacement(0.25).x, 0.5)
