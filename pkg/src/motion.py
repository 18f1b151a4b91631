"""
Compensación de la distorsión por movimiento con el modelo de velocidad constante
"""

from dataclasses import dataclass

import numpy as np

from .geometry import Velocity2D
from .prefilter import PointCloud2D

# Por debajo de este ángulo sin(phi)/phi y (1 - cos(phi))/phi se evalúan por serie
SMALL_ANGLE_RAD = 1e-6


@dataclass(frozen=True)
class CompensationConfig:
    enabled: bool = True


def azimuth_time_offsets(azimuth_indices: np.ndarray, azimuth_count: int,
                         sweep_duration_s: float) -> np.ndarray:
    """Desfase temporal de cada acimut respecto al centro del barrido, en [-dT/2, dT/2)"""
    a = np.asarray(azimuth_indices, dtype=float)
    return (a - azimuth_count / 2.0) * sweep_duration_s / azimuth_count


def _left_jacobian_terms(phi: np.ndarray):
    """sin(phi)/phi y (1 - cos(phi))/phi, continuos en phi = 0"""
    small = np.abs(phi) < SMALL_ANGLE_RAD
    safe = np.where(small, 1.0, phi)
    a = np.where(small, 1.0 - phi ** 2 / 6.0, np.sin(safe) / safe)
    b = np.where(small, phi / 2.0, (1.0 - np.cos(safe)) / safe)
    return a, b


def compensate(cloud: PointCloud2D, velocity: Velocity2D, sweep_duration_s: float,
               azimuth_count: int) -> PointCloud2D:
    """
    Proyecta cada punto al instante central del barrido

    La corrección es la exponencial de SE(2) de dt * (vx, vy, w): rotación
    R(dt*w) y traslación V(dt*w) * dt * (vx, vy). Compensar con la velocidad
    opuesta deshace la corrección.

    Args:
        cloud: Nube filtrada con índices de acimut
        velocity: Velocidad estimada en la iteración anterior
        sweep_duration_s: Duración del barrido completo
        azimuth_count: Número de acimuts por barrido

    Returns:
        PointCloud2D: Nube corregida; intensidad y acimut se conservan
    """
    if sweep_duration_s <= 0:
        raise ValueError(f"non-positive sweep duration: {sweep_duration_s}")
    if velocity.is_zero() or len(cloud) == 0:
        return cloud

    dt = azimuth_time_offsets(cloud.azimuth_indices, azimuth_count, sweep_duration_s)
    angle = dt * velocity.omega
    c, s = np.cos(angle), np.sin(angle)
    a, b = _left_jacobian_terms(angle)
    x, y = cloud.xy[:, 0], cloud.xy[:, 1]

    corrected = np.column_stack([
        c * x - s * y + dt * (a * velocity.vx - b * velocity.vy),
        s * x + c * y + dt * (b * velocity.vx + a * velocity.vy),
    ])
    return cloud.with_xy(corrected)
