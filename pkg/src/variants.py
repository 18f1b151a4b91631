"""
Variantes del pipeline y comparación sobre una misma secuencia
"""

import csv
import logging
import time
from dataclasses import astuple, dataclass, fields
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

from tqdm import tqdm

from .config import RunConfig
from .evaluation import Trajectory, evaluate_trajectories
from .odometry import RadarOdometry
from .surface import SmoothingMode
from .sweep_io import load_sweep

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

# nombre -> (suavizado, ICP, compensación de movimiento)
VARIANTS: Dict[str, tuple] = {
    "cfear3": (SmoothingMode.NONE, False, True),
    "s": (SmoothingMode.GAUSSIAN, False, True),
    "ss": (SmoothingMode.SYMMETRIC, False, True),
    "icp": (SmoothingMode.NONE, True, True),
    "s_icp": (SmoothingMode.GAUSSIAN, True, True),
    "ss_icp": (SmoothingMode.SYMMETRIC, True, True),
    "cfear1_like": (SmoothingMode.NONE, False, False),
}


def apply_variant(config: RunConfig, name: str) -> RunConfig:
    """Copia de la configuración con el suavizado, ICP y compensación de la variante"""
    if name not in VARIANTS:
        raise KeyError(f"unknown variant {name!r}; expected one of {sorted(VARIANTS)}")
    smoothing, icp, compensate = VARIANTS[name]
    variant = config.copy(deep=True)
    variant.surface.smoothing = smoothing
    variant.icp.enabled = icp
    variant.motion.compensate = compensate
    return variant


@dataclass
class BenchmarkRow:
    variant: str
    translation_percent: Optional[float]
    deg_per_100m: Optional[float]
    rpe_cm: float
    ate_m: float
    fallback_count: int
    runtime_s: float


BENCHMARK_COLUMNS = [f.name for f in fields(BenchmarkRow)]


def run_variant(sweep_paths: Sequence[PathLike], ground_truth: Trajectory, config: RunConfig,
                name: str, progress: bool = False) -> BenchmarkRow:
    variant = apply_variant(config, name)
    odometry = RadarOdometry(variant.to_odometry_config())
    sweeps = (load_sweep(p) for p in tqdm(sweep_paths, desc=name, unit="barrido", disable=not progress))

    start = time.perf_counter()
    run = odometry.run(sweeps)
    runtime = time.perf_counter() - start

    report = evaluate_trajectories(run.trajectory, ground_truth, variant.eval.segments,
                                   variant.eval.rpe_delta, variant.eval.tolerance)
    logger.info("Variante %s: ATE %.3f m, RPE %.2f cm, %d fallbacks, %.1f s",
                name, report.ate_m, report.rpe_cm, run.fallback_count, runtime)
    return BenchmarkRow(name, report.translation_percent, report.deg_per_100m, report.rpe_cm,
                        report.ate_m, run.fallback_count, runtime)


def benchmark(sweep_paths: Sequence[PathLike], ground_truth: Trajectory, config: Optional[RunConfig] = None,
              variants: Sequence[str] = tuple(VARIANTS), progress: bool = False) -> List[BenchmarkRow]:
    """
    Ejecuta cada variante sobre la secuencia y la evalúa contra la referencia

    Args:
        sweep_paths: Archivos .rps en orden temporal
        ground_truth: Trayectoria de referencia
        config: Configuración base; cada variante modifica solo sus tres claves
        variants: Nombres de las variantes a ejecutar
        progress: Mostrar barra de progreso

    Returns:
        List[BenchmarkRow]: Una fila por variante, en el orden pedido
    """
    config = config or RunConfig()
    return [run_variant(sweep_paths, ground_truth, config, name, progress) for name in variants]


def write_benchmark_csv(rows: Sequence[BenchmarkRow], path: PathLike) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(BENCHMARK_COLUMNS)
        for row in rows:
            writer.writerow(["" if v is None else v for v in astuple(row)])
