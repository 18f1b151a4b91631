"""
Geometría SE(2): poses, velocidades y alineación rígida en forma cerrada
"""

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

TWO_PI = 2.0 * math.pi


def normalize_angle(theta: float) -> float:
    """Normaliza un ángulo al intervalo (-pi, pi]"""
    wrapped = math.remainder(float(theta), TWO_PI)
    if wrapped <= -math.pi:
        wrapped += TWO_PI
    return wrapped


def rotation_matrix(theta: float) -> np.ndarray:
    """Matriz de rotación 2x2"""
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True)
class Pose2D:
    """Pose plana (x, y, theta); theta siempre en (-pi, pi]"""

    x: float = 0.0
    y: float = 0.0
    theta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        object.__setattr__(self, "theta", normalize_angle(self.theta))

    @classmethod
    def identity(cls) -> "Pose2D":
        return cls(0.0, 0.0, 0.0)

    @classmethod
    def from_vector(cls, vector) -> "Pose2D":
        x, y, theta = (float(v) for v in vector)
        return cls(x, y, theta)

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> "Pose2D":
        return cls(matrix[0, 2], matrix[1, 2], math.atan2(matrix[1, 0], matrix[0, 0]))

    @property
    def translation(self) -> np.ndarray:
        return np.array([self.x, self.y])

    @property
    def rotation(self) -> np.ndarray:
        return rotation_matrix(self.theta)

    def as_vector(self) -> np.ndarray:
        return np.array([self.x, self.y, self.theta])

    def as_matrix(self) -> np.ndarray:
        m = np.eye(3)
        m[:2, :2] = self.rotation
        m[0, 2], m[1, 2] = self.x, self.y
        return m

    def compose(self, other: "Pose2D") -> "Pose2D":
        """self ∘ other"""
        c, s = math.cos(self.theta), math.sin(self.theta)
        return Pose2D(
            self.x + c * other.x - s * other.y,
            self.y + s * other.x + c * other.y,
            self.theta + other.theta,
        )

    def inverse(self) -> "Pose2D":
        c, s = math.cos(self.theta), math.sin(self.theta)
        return Pose2D(-c * self.x - s * self.y, s * self.x - c * self.y, -self.theta)

    def between(self, other: "Pose2D") -> "Pose2D":
        """Pose relativa self^-1 ∘ other"""
        return self.inverse().compose(other)

    def transform_points(self, points: np.ndarray) -> np.ndarray:
        """Aplica la pose a un arreglo Nx2 de puntos"""
        points = np.asarray(points, dtype=float).reshape(-1, 2)
        return points @ self.rotation.T + self.translation

    def rotate_vectors(self, vectors: np.ndarray) -> np.ndarray:
        vectors = np.asarray(vectors, dtype=float).reshape(-1, 2)
        return vectors @ self.rotation.T

    def translation_norm(self) -> float:
        return math.hypot(self.x, self.y)

    def is_finite(self) -> bool:
        return all(math.isfinite(v) for v in (self.x, self.y, self.theta))


@dataclass(frozen=True)
class Velocity2D:
    """Velocidad lineal y angular en el marco del sensor (m/s, m/s, rad/s)"""

    vx: float = 0.0
    vy: float = 0.0
    omega: float = 0.0

    def __post_init__(self):
        for name in ("vx", "vy", "omega"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"non-finite velocity component {name}={value}")
            object.__setattr__(self, name, value)

    @classmethod
    def zero(cls) -> "Velocity2D":
        return cls(0.0, 0.0, 0.0)

    @classmethod
    def from_relative_pose(cls, relative: Pose2D, dt: float) -> "Velocity2D":
        """Velocidad de primer orden: (x, y, theta) de la pose relativa dividido por dt"""
        if dt <= 0:
            raise ValueError(f"non-positive time step {dt}")
        return cls(relative.x / dt, relative.y / dt, relative.theta / dt)

    def is_zero(self) -> bool:
        return self.vx == 0.0 and self.vy == 0.0 and self.omega == 0.0

    def displacement(self, dt: float) -> Pose2D:
        """Pose de velocidad constante tras dt segundos (rotación y luego traslación)"""
        return Pose2D(self.vx * dt, self.vy * dt, self.omega * dt)

    def __neg__(self) -> "Velocity2D":
        return Velocity2D(-self.vx, -self.vy, -self.omega)


def fit_rigid_transform(source: np.ndarray, target: np.ndarray) -> Pose2D:
    """
    Transformación rígida SE(2) que minimiza sum ||R p_i + t - q_i||^2

    Args:
        source: Puntos origen Nx2
        target: Puntos destino Nx2, en correspondencia con source

    Returns:
        Pose2D: Transformación óptima (forma cerrada, método de Arun en 2D)
    """
    source = np.asarray(source, dtype=float).reshape(-1, 2)
    target = np.asarray(target, dtype=float).reshape(-1, 2)
    if source.shape != target.shape or len(source) == 0:
        raise ValueError("source and target must be non-empty and of equal shape")

    source_centroid = source.mean(axis=0)
    target_centroid = target.mean(axis=0)
    h = (source - source_centroid).T @ (target - target_centroid)

    theta = math.atan2(h[0, 1] - h[1, 0], h[0, 0] + h[1, 1])
    t = target_centroid - rotation_matrix(theta) @ source_centroid
    return Pose2D(t[0], t[1], theta)


def poses_to_arrays(poses) -> Tuple[np.ndarray, np.ndarray]:
    """Separa una lista de poses en posiciones Nx2 y ángulos N"""
    positions = np.array([[p.x, p.y] for p in poses], dtype=float).reshape(-1, 2)
    thetas = np.array([p.theta for p in poses], dtype=float)
    return positions, thetas
