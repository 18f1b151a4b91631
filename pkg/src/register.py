"""
Registro robusto de un barrido contra múltiples keyframes en SE(2)
y refinamiento de la pose por ICP punto a punto
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple, Union

import numpy as np
from scipy.spatial import cKDTree

from .errors import ConfigError, DegenerateRegistrationError
from .geometry import Pose2D, fit_rigid_transform, normalize_angle
from .prefilter import PointCloud2D
from .surface import SurfacePoint, SurfacePointSet

logger = logging.getLogger(__name__)

# Candidatos por consulta antes de recurrir a la búsqueda exhaustiva por radio
NEIGHBOUR_CANDIDATES = 16
MAX_STEP_HALVINGS = 8

KeyframeInput = Tuple[SurfacePointSet, Pose2D]


@dataclass(frozen=True)
class RegistrationConfig:
    """Parámetros del registro barrido -> keyframes"""

    correspondence_radius_m: float = 3.5
    huber_delta: float = 0.1
    max_iterations: int = 30
    convergence_tol: float = 1e-6
    min_correspondences: int = 10

    def __post_init__(self):
        for name in ("correspondence_radius_m", "huber_delta", "max_iterations",
                     "convergence_tol", "min_correspondences"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")


@dataclass(frozen=True)
class IcpConfig:
    """Parámetros del refinamiento ICP"""

    enabled: bool = True
    fitness_threshold: float = 1.0
    max_corr_dist_m: float = 2.0
    max_iterations: int = 30

    def __post_init__(self):
        if not self.fitness_threshold > 0:
            raise ConfigError(f"fitness_threshold must be positive, got {self.fitness_threshold}")
        if not self.max_corr_dist_m > 0:
            raise ConfigError(f"max_corr_dist must be positive, got {self.max_corr_dist_m}")
        if self.max_iterations < 1:
            raise ConfigError(f"ICP max_iterations must be >= 1, got {self.max_iterations}")


@dataclass(frozen=True)
class Correspondence:
    keyframe_index: int
    source_index: int
    target_index: int
    weight: float


@dataclass(frozen=True)
class RegistrationResult:
    pose: Pose2D
    final_cost: float
    iterations: int
    correspondence_count: int
    converged: bool


@dataclass(frozen=True)
class IcpResult:
    pose: Pose2D
    fitness: float
    accepted: bool
    inlier_count: int
    iterations: int


@dataclass(frozen=True, eq=False)
class _Matches:
    """Correspondencias en forma de arreglos alineados"""

    keyframe: np.ndarray
    source: np.ndarray
    target: np.ndarray
    weight: np.ndarray
    source_means: np.ndarray
    target_means: np.ndarray

    def __len__(self) -> int:
        return len(self.source)

    def to_list(self) -> List[Correspondence]:
        return [
            Correspondence(int(k), int(s), int(t), float(w))
            for k, s, t, w in zip(self.keyframe, self.source, self.target, self.weight)
        ]


def f_sim(a, b):
    """Similitud 2*min(a, b)/(a + b); 1 cuando ambos son cero"""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    total = a + b
    ratio = 2.0 * np.minimum(a, b) / np.where(total > 0, total, 1.0)
    return np.where(total > 0, ratio, 1.0)


def _similarity_weights(src_planarity, tgt_planarity, src_counts, tgt_counts, normal_dots):
    return f_sim(src_planarity, tgt_planarity) + f_sim(src_counts, tgt_counts) + np.maximum(normal_dots, 0.0)


def residual_weight(src: SurfacePoint, tgt: SurfacePoint, guess: Pose2D = Pose2D()) -> float:
    """
    Peso de un residuo según la similitud de los puntos de superficie

    w = f_sim(planaridad) + f_sim(número de detecciones) + max(n_i . n_j, 0),
    con la normal origen rotada por la pose estimada.
    """
    src_normal = guess.rotate_vectors(src.normal)[0]
    dot = float(np.dot(src_normal, np.asarray(tgt.normal, dtype=float)))
    return float(_similarity_weights(src.planarity, tgt.planarity, src.point_count, tgt.point_count, dot))


def huber_loss(residual_sq, delta: float):
    """Huber sobre el residuo cuadrático s: s si s <= delta^2, si no 2*delta*sqrt(s) - delta^2"""
    s = np.asarray(residual_sq, dtype=float)
    d2 = delta * delta
    value = np.where(s <= d2, s, 2.0 * delta * np.sqrt(np.maximum(s, d2)) - d2)
    return float(value) if value.ndim == 0 else value


def huber_derivative(residual_sq, delta: float):
    """dL/ds"""
    s = np.asarray(residual_sq, dtype=float)
    d2 = delta * delta
    return np.where(s <= d2, 1.0, delta / np.sqrt(np.maximum(s, d2)))


class _KeyframeTarget:
    """Keyframe expresado en el marco de odometría, con su índice de búsqueda"""

    def __init__(self, surface_points: SurfacePointSet, pose: Pose2D):
        self.means = pose.transform_points(surface_points.means)
        self.normals = pose.rotate_vectors(surface_points.normals)
        self.counts = surface_points.counts
        self.planarities = surface_points.planarities
        self.tree = cKDTree(self.means) if len(self.means) else None

    def __len__(self) -> int:
        return len(self.means)


class RegistrationProblem:
    """Función de costo f(M_K, M_t, x_t) con sus derivadas"""

    def __init__(self, scan: SurfacePointSet, keyframes: Sequence[KeyframeInput], radius: float, delta: float):
        self.scan = scan
        self.targets = [_KeyframeTarget(points, pose) for points, pose in keyframes]
        self.radius = radius
        self.delta = delta

    def correspondences(self, pose: Pose2D) -> _Matches:
        """Vecino más cercano por keyframe dentro del radio, con normales compatibles"""
        src_world = pose.transform_points(self.scan.means)
        src_normals = pose.rotate_vectors(self.scan.normals)
        n = len(src_world)

        keyframe_ids, source_ids, target_ids, weights, target_means = [], [], [], [], []
        for k, target in enumerate(self.targets):
            if len(target) == 0 or n == 0:
                continue
            chosen = self._nearest_compatible(target, src_world, src_normals)
            matched = np.flatnonzero(chosen >= 0)
            if len(matched) == 0:
                continue
            tgt = chosen[matched]
            dots = np.einsum("nd,nd->n", src_normals[matched], target.normals[tgt])
            keyframe_ids.append(np.full(len(matched), k))
            source_ids.append(matched)
            target_ids.append(tgt)
            target_means.append(target.means[tgt])
            weights.append(_similarity_weights(
                self.scan.planarities[matched], target.planarities[tgt],
                self.scan.counts[matched], target.counts[tgt], dots))

        if not source_ids:
            empty_i = np.zeros(0, dtype=np.int64)
            return _Matches(empty_i, empty_i, empty_i, np.zeros(0), np.zeros((0, 2)), np.zeros((0, 2)))

        source = np.concatenate(source_ids)
        return _Matches(np.concatenate(keyframe_ids), source, np.concatenate(target_ids),
                        np.concatenate(weights), self.scan.means[source], np.concatenate(target_means))

    def _nearest_compatible(self, target: _KeyframeTarget, points: np.ndarray, normals: np.ndarray) -> np.ndarray:
        n = len(points)
        kq = min(len(target), NEIGHBOUR_CANDIDATES)
        dist, idx = target.tree.query(points, k=kq, distance_upper_bound=self.radius)
        dist, idx = dist.reshape(n, kq), idx.reshape(n, kq)

        within = np.isfinite(dist)
        safe = np.where(within, idx, 0)
        dots = np.einsum("nd,nkd->nk", normals, target.normals[safe])
        valid = within & (dots > 0)

        has_match = valid.any(axis=1)
        chosen = np.where(has_match, idx[np.arange(n), valid.argmax(axis=1)], -1)

        # Todos los candidatos dentro del radio y ninguno compatible: búsqueda exhaustiva
        overflow = ~has_match & within.all(axis=1) & (kq < len(target))
        for i in np.flatnonzero(overflow):
            candidates = np.asarray(target.tree.query_ball_point(points[i], self.radius), dtype=np.int64)
            compatible = candidates[target.normals[candidates] @ normals[i] > 0]
            if len(compatible):
                d = np.linalg.norm(target.means[compatible] - points[i], axis=1)
                chosen[i] = compatible[np.lexsort((compatible, d))[0]]
        return chosen

    @staticmethod
    def _residuals(x: np.ndarray, matches: _Matches) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        c, s = math.cos(x[2]), math.sin(x[2])
        mu = matches.source_means
        rotated = np.column_stack([c * mu[:, 0] - s * mu[:, 1], s * mu[:, 0] + c * mu[:, 1]])
        e = matches.target_means - (rotated + x[:2])
        # de/dtheta = -dR/dtheta * mu
        de_dtheta = np.column_stack([rotated[:, 1], -rotated[:, 0]])
        return e, de_dtheta, np.einsum("nd,nd->n", e, e)

    def cost(self, x, matches: _Matches) -> float:
        x = np.asarray(x, dtype=float)
        if len(matches) == 0:
            return 0.0
        _, _, sq = self._residuals(x, matches)
        return float(np.sum(matches.weight * huber_loss(sq, self.delta)))

    def gradient(self, x, matches: _Matches) -> np.ndarray:
        """Gradiente analítico de la función de costo respecto a (x, y, theta)"""
        x = np.asarray(x, dtype=float)
        e, de_dtheta, sq = self._residuals(x, matches)
        c = matches.weight * huber_derivative(sq, self.delta)
        return 2.0 * np.array([
            -np.sum(c * e[:, 0]),
            -np.sum(c * e[:, 1]),
            np.sum(c * np.einsum("nd,nd->n", de_dtheta, e)),
        ])

    def normal_equations(self, x, matches: _Matches) -> Tuple[np.ndarray, np.ndarray, float]:
        """Sistema de Gauss-Newton reponderado (IRLS) para la pérdida de Huber"""
        x = np.asarray(x, dtype=float)
        e, de_dtheta, sq = self._residuals(x, matches)
        c = matches.weight * huber_derivative(sq, self.delta)

        n = len(e)
        jac = np.zeros((n, 2, 3))
        jac[:, 0, 0] = -1.0
        jac[:, 1, 1] = -1.0
        jac[:, :, 2] = de_dtheta

        h = np.einsum("n,nai,naj->ij", c, jac, jac)
        b = np.einsum("n,nai,na->i", c, jac, e)
        cost = float(np.sum(matches.weight * huber_loss(sq, self.delta)))
        return h, b, cost


def find_correspondences(scan: SurfacePointSet, keyframes: Sequence[KeyframeInput], guess: Pose2D,
                         radius: float) -> List[Correspondence]:
    """Correspondencias 1-NN por keyframe para el barrido transformado por la pose estimada"""
    problem = RegistrationProblem(scan, keyframes, radius, delta=1.0)
    return problem.correspondences(guess).to_list()


def register(scan: SurfacePointSet, keyframes: Sequence[KeyframeInput], guess: Pose2D,
             cfg: RegistrationConfig) -> RegistrationResult:
    """
    Minimiza sum_k sum_(i,j) w_ij * L_delta(||mu_kj - (R mu_ti + t)||^2)

    Gauss-Newton con correspondencias recalculadas en cada iteración y
    amortiguación del paso por bisección cuando el costo no disminuye.

    Args:
        scan: Puntos de superficie del barrido actual
        keyframes: Ventana de keyframes (puntos, pose)
        guess: Pose inicial (predicción de velocidad constante)
        cfg: Parámetros del registro

    Returns:
        RegistrationResult: Pose estimada y resumen de la optimización
    """
    if not keyframes:
        raise ValueError("registration needs at least one keyframe")
    if len(scan) == 0:
        raise DegenerateRegistrationError("registration degenerate: empty scan", 0)

    problem = RegistrationProblem(scan, keyframes, cfg.correspondence_radius_m, cfg.huber_delta)
    x = guess.as_vector()
    converged = False
    iterations = 0

    for iterations in range(1, cfg.max_iterations + 1):
        matches = problem.correspondences(Pose2D.from_vector(x))
        if len(matches) < cfg.min_correspondences:
            raise DegenerateRegistrationError(
                f"registration degenerate: {len(matches)} correspondences (< {cfg.min_correspondences})",
                len(matches))

        h, b, cost = problem.normal_equations(x, matches)
        try:
            step = -np.linalg.solve(h, b)
        except np.linalg.LinAlgError as e:
            raise DegenerateRegistrationError(f"registration degenerate: singular system ({e})",
                                              len(matches)) from e

        if np.linalg.norm(step) < cfg.convergence_tol:
            if problem.cost(x + step, matches) <= cost:
                x = x + step
            converged = True
            break

        scale = 1.0
        for _ in range(MAX_STEP_HALVINGS + 1):
            if problem.cost(x + scale * step, matches) <= cost:
                break
            scale *= 0.5
        else:
            logger.debug("Registro: sin descenso tras %d bisecciones", MAX_STEP_HALVINGS)
            break

        x = x + scale * step
        if scale * np.linalg.norm(step) < cfg.convergence_tol:
            converged = True
            break

    x[2] = normalize_angle(x[2])
    pose = Pose2D.from_vector(x)
    final_matches = problem.correspondences(pose)
    final_cost = problem.cost(x, final_matches)
    logger.debug("Registro: %d iteraciones, %d correspondencias, costo %.6g",
                 iterations, len(final_matches), final_cost)
    return RegistrationResult(pose, final_cost, iterations, len(final_matches), converged)


def _as_xy(cloud: Union[PointCloud2D, SurfacePointSet, np.ndarray]) -> np.ndarray:
    if isinstance(cloud, PointCloud2D):
        return cloud.xy
    if isinstance(cloud, SurfacePointSet):
        return cloud.means
    return np.asarray(cloud, dtype=float).reshape(-1, 2)


def icp_refine(current_means, previous_means, initial: Pose2D, fitness_threshold: float = 1.0,
               max_corr_dist: float = 2.0, max_iterations: int = 30,
               min_correspondences: int = 10) -> IcpResult:
    """
    ICP punto a punto entre las medias de dos barridos consecutivos

    Args:
        current_means: Medias del barrido actual (marco del barrido actual)
        previous_means: Medias del barrido anterior (marco del barrido anterior)
        initial: Pose relativa anterior^-1 ∘ actual estimada por el registro
        fitness_threshold: Umbral de aceptación del fitness euclidiano
        max_corr_dist: Distancia máxima de correspondencia
        max_iterations: Máximo de iteraciones
        min_correspondences: Mínimo de inliers para aceptar

    Returns:
        IcpResult: Si no se acepta, la pose devuelta es `initial` sin cambios
    """
    source = _as_xy(current_means)
    target = _as_xy(previous_means)
    if len(source) == 0 or len(target) == 0:
        return IcpResult(initial, math.inf, False, 0, 0)

    tree = cKDTree(target)
    pose = initial
    iterations = 0
    for iterations in range(1, max_iterations + 1):
        dist, idx = tree.query(pose.transform_points(source), k=1, distance_upper_bound=max_corr_dist)
        inliers = np.isfinite(dist)
        if np.count_nonzero(inliers) < 2:
            break
        updated = fit_rigid_transform(source[inliers], target[idx[inliers]])
        change = np.abs(updated.as_vector() - pose.as_vector())
        change[2] = abs(normalize_angle(updated.theta - pose.theta))
        pose = updated
        if change.max() < 1e-10:
            break

    dist, _ = tree.query(pose.transform_points(source), k=1, distance_upper_bound=max_corr_dist)
    inliers = np.isfinite(dist)
    inlier_count = int(np.count_nonzero(inliers))
    fitness = float(np.mean(dist[inliers] ** 2)) if inlier_count else math.inf

    accepted = fitness < fitness_threshold and inlier_count >= min_correspondences
    logger.debug("ICP: fitness %.4g con %d inliers (%s)", fitness, inlier_count,
                 "aceptado" if accepted else "rechazado")
    return IcpResult(pose if accepted else initial, fitness, accepted, inlier_count, iterations)
