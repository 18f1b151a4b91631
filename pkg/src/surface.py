"""
Puntos de superficie orientados sobre una rejilla regular, con suavizado
opcional por kernel gaussiano o kernel gaussiano simétrico
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial import cKDTree

from .errors import ConfigError, DegenerateWeightsError
from .prefilter import PointCloud2D

logger = logging.getLogger(__name__)

GAUSSIAN_KERNEL = np.array([[1.0, 2.0, 1.0], [2.0, 4.0, 2.0], [1.0, 2.0, 1.0]]) / 16.0

# Celdas con lambda_max / lambda_min por debajo de este valor no tienen normal definida
ISOTROPY_RATIO = 1.0 + 1e-6
EIGEN_FLOOR = 1e-12

CellKey = Tuple[int, int]


class SmoothingMode(str, Enum):
    NONE = "none"
    GAUSSIAN = "gaussian"
    SYMMETRIC = "symmetric"


@dataclass(frozen=True)
class SurfaceConfig:
    """Parámetros de la rejilla de puntos de superficie"""

    resolution_m: float = 3.5
    min_points: int = 2
    smoothing: SmoothingMode = SmoothingMode.NONE

    def __post_init__(self):
        if not self.resolution_m > 0:
            raise ConfigError(f"surface resolution must be positive, got {self.resolution_m}")
        if self.min_points < 2:
            raise ConfigError(f"min_points must be >= 2, got {self.min_points}")
        object.__setattr__(self, "smoothing", SmoothingMode(self.smoothing))


class CellStatistics(NamedTuple):
    """Media y covarianza ponderadas de una vecindad, con su número de puntos"""

    mean: np.ndarray
    covariance: np.ndarray
    count: int


@dataclass(frozen=True, eq=False)
class SurfacePoint:
    """Punto de superficie orientado: media, normal, covarianza, conteo y planaridad"""

    mean: np.ndarray
    normal: np.ndarray
    covariance: np.ndarray
    point_count: int
    planarity: float


@dataclass
class SurfaceDiagnostics:
    """Contadores de celdas descartadas durante la construcción"""

    occupied_cells: int = 0
    sparse_cells: int = 0
    zero_weight_cells: int = 0
    isotropic_cells: int = 0
    smoothed_cells: int = 0
    emitted_points: int = 0

    @property
    def dropped_cells(self) -> int:
        return self.sparse_cells + self.zero_weight_cells + self.isotropic_cells


@dataclass(frozen=True, eq=False)
class SurfacePointSet:
    """Conjunto disperso de puntos de superficie, como mucho uno por celda"""

    points: List[SurfacePoint]
    grid_resolution_m: float
    cell_index: Dict[CellKey, int]
    diagnostics: SurfaceDiagnostics = field(default_factory=SurfaceDiagnostics)

    def __post_init__(self):
        if len(self.cell_index) != len(self.points) or sorted(self.cell_index.values()) != list(range(len(self.points))):
            raise ValueError("cell_index must map one grid cell to each surface point")
        points = self.points
        object.__setattr__(self, "_means", np.array([p.mean for p in points], dtype=float).reshape(-1, 2))
        object.__setattr__(self, "_normals", np.array([p.normal for p in points], dtype=float).reshape(-1, 2))
        object.__setattr__(self, "_counts", np.array([p.point_count for p in points], dtype=float))
        object.__setattr__(self, "_planarities", np.array([p.planarity for p in points], dtype=float))

    @classmethod
    def empty(cls, grid_resolution_m: float) -> "SurfacePointSet":
        return cls([], grid_resolution_m, {})

    @classmethod
    def from_arrays(cls, means: np.ndarray, normals: np.ndarray, grid_resolution_m: float,
                    counts: Optional[Sequence[int]] = None,
                    covariances: Optional[np.ndarray] = None) -> "SurfacePointSet":
        """
        Construye un conjunto a partir de arreglos (simulación y pruebas)

        Sin covarianzas explícitas se usa una covarianza alargada a lo largo
        de la tangente, coherente con la normal dada.
        """
        means = np.asarray(means, dtype=float).reshape(-1, 2)
        normals = np.asarray(normals, dtype=float).reshape(-1, 2)
        normals = normals / np.linalg.norm(normals, axis=1, keepdims=True)
        if counts is None:
            counts = [2] * len(means)
        if covariances is None:
            tangents = np.column_stack([-normals[:, 1], normals[:, 0]])
            covariances = (np.einsum("ni,nj->nij", tangents, tangents)
                           + 0.01 * np.einsum("ni,nj->nij", normals, normals))

        keys = [tuple(int(v) for v in k) for k in np.floor(means / grid_resolution_m).astype(np.int64)]
        if len(set(keys)) != len(keys):
            raise ValueError("more than one surface point per grid cell")

        points = [
            SurfacePoint(means[i], normals[i], np.asarray(covariances[i], dtype=float),
                         int(counts[i]), planarity_from_covariance(covariances[i]))
            for i in range(len(means))
        ]
        return cls(points, grid_resolution_m, {key: i for i, key in enumerate(keys)})

    def __len__(self) -> int:
        return len(self.points)

    @property
    def means(self) -> np.ndarray:
        return self._means

    @property
    def normals(self) -> np.ndarray:
        return self._normals

    @property
    def counts(self) -> np.ndarray:
        return self._counts

    @property
    def planarities(self) -> np.ndarray:
        return self._planarities


def planarity_from_eigenvalues(lam_min, lam_max):
    """log(1 + |lambda_max / lambda_min|) con lambda_min acotado inferiormente"""
    lam_min = np.asarray(lam_min, dtype=float)
    lam_max = np.asarray(lam_max, dtype=float)
    floor = EIGEN_FLOOR * np.maximum(np.abs(lam_max), 1.0)
    return np.log1p(np.abs(lam_max / np.maximum(lam_min, floor)))


def planarity_from_covariance(covariance: np.ndarray) -> float:
    eigenvalues = np.linalg.eigh(np.asarray(covariance, dtype=float))[0]
    return float(planarity_from_eigenvalues(eigenvalues[0], eigenvalues[1]))


def compute_cell_statistics(points: np.ndarray, intensities: Sequence[float], z_min: float) -> CellStatistics:
    """
    Media y covarianza muestrales ponderadas por intensidad

    Args:
        points: Matriz 2 x l de coordenadas
        intensities: l retornos de potencia
        z_min: Umbral de ruido; el peso de cada punto es z_j - z_min

    Returns:
        CellStatistics: (media, covarianza, l)
    """
    p = np.asarray(points, dtype=float)
    if p.ndim != 2 or p.shape[0] != 2 or p.shape[1] < 1:
        raise ValueError(f"points must be a 2 x l matrix with l >= 1, got shape {p.shape}")

    w = np.asarray(intensities, dtype=float) - z_min
    total = w.sum()
    if not total > 0:
        raise DegenerateWeightsError("zero total weight")
    w = w / total

    mean = p @ w
    centered = p - mean[:, None]
    covariance = (centered * w) @ centered.T
    covariance = 0.5 * (covariance + covariance.T)
    return CellStatistics(mean, covariance, p.shape[1])


def symmetric_gate(weights: np.ndarray):
    """
    Condición de simetría del kernel: cada peso y su espejo respecto al centro
    son ambos positivos o ambos nulos

    Args:
        weights: Rejilla k x k (o lote ... x k x k) de pesos kernel * conteo

    Returns:
        bool (o arreglo de bool para un lote): True si se permite suavizar
    """
    positive = np.asarray(weights) > 0
    mirrored = positive[..., ::-1, ::-1]
    result = np.all(positive == mirrored, axis=(-2, -1))
    return bool(result) if result.ndim == 0 else result


def _smooth_cells(keys: np.ndarray, means: np.ndarray, covariances: np.ndarray, counts: np.ndarray,
                  symmetric: bool) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Un pase de suavizado 3x3 sobre celdas ordenadas; devuelve medias, covarianzas y máscara aplicada"""
    m = len(keys)
    if m == 0:
        return means, covariances, np.zeros(0, dtype=bool)

    origin = keys.min(axis=0) - 1
    shape = tuple(keys.max(axis=0) - origin + 2)
    idx = keys - origin
    slots = -np.ones(shape, dtype=np.int64)
    slots[idx[:, 0], idx[:, 1]] = np.arange(m)

    offsets = [(di, dj) for di in (-1, 0, 1) for dj in (-1, 0, 1)]
    neighbours = np.stack([slots[idx[:, 0] + di, idx[:, 1] + dj] for di, dj in offsets], axis=1)
    present = neighbours >= 0
    safe = np.where(present, neighbours, np.arange(m)[:, None])

    raw = np.where(present, GAUSSIAN_KERNEL.reshape(1, 9) * counts[safe], 0.0)
    weights = raw / raw.sum(axis=1, keepdims=True)

    # Momentos centrados en la celda central: exacto para vecindarios uniformes
    delta = means[safe] - means[:, None, :]
    shift = np.einsum("nk,nkd->nd", weights, delta)
    spread = (covariances[safe] - covariances[:, None, :, :]
              + delta[:, :, :, None] * delta[:, :, None, :])
    smoothed_cov = (covariances + np.einsum("nk,nkab->nab", weights, spread)
                    - shift[:, :, None] * shift[:, None, :])
    smoothed_cov = 0.5 * (smoothed_cov + np.swapaxes(smoothed_cov, 1, 2))
    smoothed_mean = means + shift

    if symmetric:
        applied = symmetric_gate(raw.reshape(m, 3, 3))
    else:
        applied = np.ones(m, dtype=bool)

    out_means = np.where(applied[:, None], smoothed_mean, means)
    out_covs = np.where(applied[:, None, None], smoothed_cov, covariances)
    return out_means, out_covs, applied


def gaussian_smooth(grid: Dict[CellKey, CellStatistics], symmetric: bool = False) -> Dict[CellKey, CellStatistics]:
    """
    Suavizado gaussiano 3x3 de la rejilla de estadísticas por celda

    Los pesos del kernel se multiplican por el número de puntos de cada celda
    vecina y se renormalizan. Con symmetric=True la celda conserva sus
    estadísticas originales cuando el vecindario no es simétrico.
    """
    if not grid:
        return {}
    keys = sorted(grid)
    key_array = np.array(keys, dtype=np.int64).reshape(-1, 2)
    means = np.array([grid[k].mean for k in keys], dtype=float)
    covs = np.array([grid[k].covariance for k in keys], dtype=float)
    counts = np.array([grid[k].count for k in keys], dtype=float)

    new_means, new_covs, _ = _smooth_cells(key_array, means, covs, counts, symmetric)
    return {k: CellStatistics(new_means[i], new_covs[i], grid[k].count) for i, k in enumerate(keys)}


def _neighbourhood_statistics(cloud: PointCloud2D, neighbourhoods: Sequence[Sequence[int]],
                              z_min: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Estadísticas ponderadas de todas las vecindades a la vez; devuelve medias, covarianzas y peso total"""
    m = len(neighbourhoods)
    lengths = np.array([len(n) for n in neighbourhoods], dtype=np.int64)
    flat = np.concatenate([np.asarray(n, dtype=np.int64) for n in neighbourhoods])
    owner = np.repeat(np.arange(m), lengths)

    w = cloud.intensities[flat] - z_min
    total = np.bincount(owner, weights=w, minlength=m)
    safe_total = np.where(total > 0, total, 1.0)
    wn = w / safe_total[owner]

    px, py = cloud.xy[flat, 0], cloud.xy[flat, 1]
    mx = np.bincount(owner, weights=wn * px, minlength=m)
    my = np.bincount(owner, weights=wn * py, minlength=m)
    dx, dy = px - mx[owner], py - my[owner]
    cxx = np.bincount(owner, weights=wn * dx * dx, minlength=m)
    cxy = np.bincount(owner, weights=wn * dx * dy, minlength=m)
    cyy = np.bincount(owner, weights=wn * dy * dy, minlength=m)

    means = np.column_stack([mx, my])
    covariances = np.stack([np.column_stack([cxx, cxy]), np.column_stack([cxy, cyy])], axis=1)
    return means, covariances, total


def build_surface_points(cloud: PointCloud2D, resolution: float, z_min: float, min_points: int = 2,
                         mode: SmoothingMode = SmoothingMode.NONE,
                         sensor_origin: Tuple[float, float] = (0.0, 0.0)) -> SurfacePointSet:
    """
    Calcula los puntos de superficie orientados de una nube

    Args:
        cloud: Nube filtrada y compensada
        resolution: Tamaño de celda r, también radio de búsqueda
        z_min: Umbral de ruido para los pesos de intensidad
        min_points: Mínimo de puntos por vecindad
        mode: Suavizado a aplicar
        sensor_origin: Origen del sensor; las normales apuntan hacia él

    Returns:
        SurfacePointSet: Celdas ordenadas por coordenadas enteras de rejilla
    """
    if not resolution > 0:
        raise ConfigError(f"surface resolution must be positive, got {resolution}")
    if min_points < 2:
        raise ConfigError(f"min_points must be >= 2, got {min_points}")
    mode = SmoothingMode(mode)

    diagnostics = SurfaceDiagnostics()
    if len(cloud) == 0:
        return SurfacePointSet([], resolution, {}, diagnostics)

    cells = np.unique(np.floor(cloud.xy / resolution).astype(np.int64), axis=0)
    diagnostics.occupied_cells = len(cells)
    centers = (cells + 0.5) * resolution

    tree = cKDTree(cloud.xy)
    neighbourhoods = tree.query_ball_point(centers, r=resolution, return_sorted=True)
    lengths = np.array([len(n) for n in neighbourhoods], dtype=np.int64)

    dense = lengths >= min_points
    diagnostics.sparse_cells = int(np.count_nonzero(~dense))
    if not np.any(dense):
        return SurfacePointSet([], resolution, {}, diagnostics)

    cells = cells[dense]
    counts = lengths[dense].astype(float)
    means, covariances, total = _neighbourhood_statistics(
        cloud, [neighbourhoods[i] for i in np.flatnonzero(dense)], z_min)

    weighted = total > 0
    diagnostics.zero_weight_cells = int(np.count_nonzero(~weighted))
    cells, counts = cells[weighted], counts[weighted]
    means, covariances = means[weighted], covariances[weighted]

    if mode is not SmoothingMode.NONE and len(cells):
        means, covariances, applied = _smooth_cells(
            cells, means, covariances, counts, symmetric=mode is SmoothingMode.SYMMETRIC)
        diagnostics.smoothed_cells = int(np.count_nonzero(applied))

    eigenvalues, eigenvectors = np.linalg.eigh(covariances)
    lam_min, lam_max = eigenvalues[:, 0], eigenvalues[:, 1]
    floor = EIGEN_FLOOR * np.maximum(np.abs(lam_max), 1.0)
    isotropic = (lam_max <= floor) | (lam_max / np.maximum(lam_min, floor) < ISOTROPY_RATIO)
    diagnostics.isotropic_cells = int(np.count_nonzero(isotropic))

    normals = eigenvectors[:, :, 0].copy()
    towards_sensor = np.asarray(sensor_origin, dtype=float) - means
    flip = np.einsum("nd,nd->n", normals, towards_sensor) < 0
    normals[flip] *= -1.0
    planarities = planarity_from_eigenvalues(lam_min, lam_max)

    points: List[SurfacePoint] = []
    cell_index: Dict[CellKey, int] = {}
    for i in np.flatnonzero(~isotropic):
        cell_index[(int(cells[i, 0]), int(cells[i, 1]))] = len(points)
        points.append(SurfacePoint(means[i], normals[i], covariances[i], int(counts[i]), float(planarities[i])))

    diagnostics.emitted_points = len(points)
    logger.debug("Puntos de superficie: %d emitidos, %d celdas descartadas", len(points), diagnostics.dropped_cells)
    return SurfacePointSet(points, resolution, cell_index, diagnostics)
