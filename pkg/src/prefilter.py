"""
Filtrado k-strongest por acimut y conversión polar -> cartesiana
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .sweep_io import PolarSweep


@dataclass(frozen=True)
class FilterConfig:
    """Parámetros del filtro k-strongest"""

    k_strongest: int = 12
    z_min: float = 55.0
    min_range_bin: int = 0

    def __post_init__(self):
        if self.k_strongest < 1:
            raise ConfigError(f"k_strongest must be >= 1, got {self.k_strongest}")
        if self.z_min < 0:
            raise ConfigError(f"z_min must be >= 0, got {self.z_min}")
        if self.min_range_bin < 0:
            raise ConfigError(f"min_range_bin must be >= 0, got {self.min_range_bin}")


@dataclass(frozen=True, eq=False)
class PointCloud2D:
    """Nube de puntos cartesiana con intensidad e índice de acimut de origen"""

    xy: np.ndarray
    intensities: np.ndarray
    azimuth_indices: np.ndarray

    def __post_init__(self):
        xy = np.asarray(self.xy, dtype=float).reshape(-1, 2)
        intensities = np.asarray(self.intensities, dtype=float).reshape(-1)
        azimuth_indices = np.asarray(self.azimuth_indices, dtype=np.int64).reshape(-1)
        if not (len(xy) == len(intensities) == len(azimuth_indices)):
            raise ValueError("xy, intensities and azimuth_indices must have the same length")
        if not np.all(np.isfinite(xy)):
            raise ValueError("point coordinates must be finite")
        for array in (xy, intensities, azimuth_indices):
            array.setflags(write=False)
        object.__setattr__(self, "xy", xy)
        object.__setattr__(self, "intensities", intensities)
        object.__setattr__(self, "azimuth_indices", azimuth_indices)

    @classmethod
    def empty(cls) -> "PointCloud2D":
        return cls(np.zeros((0, 2)), np.zeros(0), np.zeros(0, dtype=np.int64))

    def __len__(self) -> int:
        return len(self.xy)

    def with_xy(self, xy: np.ndarray) -> "PointCloud2D":
        """Copia con nuevas coordenadas (intensidad y acimut se conservan)"""
        return PointCloud2D(xy, self.intensities, self.azimuth_indices)


def k_strongest_mask(intensities: np.ndarray, cfg: FilterConfig) -> np.ndarray:
    """
    Máscara booleana N_a x N_r de los bins retenidos

    Por acimut: los k bins más intensos (empates hacia el bin más cercano),
    restringidos a intensidad > z_min y bin >= min_range_bin.
    """
    intensities = np.asarray(intensities, dtype=float)
    n_r = intensities.shape[1]
    columns = np.arange(n_r)

    candidates = np.where(columns >= cfg.min_range_bin, intensities, -np.inf)
    mask = candidates > cfg.z_min

    # solo las filas con más de k bins sobre el umbral necesitan ordenarse
    crowded = np.flatnonzero(mask.sum(axis=1) > cfg.k_strongest)
    if len(crowded):
        # argsort estable sobre -z: orden descendente con empates en orden de índice
        order = np.argsort(-candidates[crowded], axis=1, kind="stable")[:, : cfg.k_strongest]
        top = np.zeros((len(crowded), n_r), dtype=bool)
        np.put_along_axis(top, order, True, axis=1)
        mask[crowded] = top
    return mask


def polar_to_cartesian(range_bins: np.ndarray, azimuth_indices: np.ndarray,
                       azimuth_count: int, range_resolution_m: float) -> np.ndarray:
    """p = (d*gamma*cos(theta), d*gamma*sin(theta)) con theta = 2*pi*a/N_a"""
    theta = 2.0 * math.pi * np.asarray(azimuth_indices, dtype=float) / azimuth_count
    rho = np.asarray(range_bins, dtype=float) * range_resolution_m
    return np.column_stack([rho * np.cos(theta), rho * np.sin(theta)])


def k_strongest_filter(sweep: PolarSweep, cfg: FilterConfig) -> PointCloud2D:
    """
    Filtra el barrido y lo convierte en nube cartesiana

    Args:
        sweep: Barrido polar validado
        cfg: Parámetros del filtro

    Returns:
        PointCloud2D: Puntos en orden de acimut y luego rango ascendente
    """
    mask = k_strongest_mask(sweep.intensities, cfg)
    # np.nonzero recorre en orden fila-mayor: acimut y luego rango
    azimuths, bins = np.nonzero(mask)
    if len(azimuths) == 0:
        return PointCloud2D.empty()

    xy = polar_to_cartesian(bins, azimuths, sweep.azimuth_count, sweep.range_resolution_m)
    return PointCloud2D(xy, sweep.intensities[azimuths, bins], azimuths)
