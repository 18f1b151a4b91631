"""
Evaluación de trayectorias: error KITTI (% de traslación, grados/100 m), RPE y ATE
"""

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import TrajectoryError
from .geometry import Pose2D, fit_rigid_transform, normalize_angle, poses_to_arrays

logger = logging.getLogger(__name__)

DEFAULT_SEGMENTS_M: Tuple[float, ...] = (100.0, 200.0, 300.0, 400.0, 500.0, 600.0, 700.0, 800.0)
DEFAULT_TOLERANCE_S = 0.05

PathLike = Union[str, Path]


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Secuencia de poses con marcas de tiempo estrictamente crecientes"""

    timestamps: np.ndarray
    poses: List[Pose2D]

    def __post_init__(self):
        timestamps = np.asarray(self.timestamps, dtype=float).reshape(-1)
        poses = list(self.poses)
        if len(timestamps) != len(poses):
            raise TrajectoryError("timestamps and poses must have the same length")
        if len(timestamps) > 1 and not np.all(np.diff(timestamps) > 0):
            raise TrajectoryError("trajectory timestamps must be strictly increasing")
        timestamps.setflags(write=False)
        object.__setattr__(self, "timestamps", timestamps)
        object.__setattr__(self, "poses", poses)

    @classmethod
    def from_pairs(cls, pairs: Iterable[Tuple[float, Pose2D]]) -> "Trajectory":
        pairs = list(pairs)
        return cls(np.array([t for t, _ in pairs], dtype=float), [p for _, p in pairs])

    def __len__(self) -> int:
        return len(self.poses)

    def __iter__(self):
        return iter(zip(self.timestamps, self.poses))

    @property
    def positions(self) -> np.ndarray:
        return poses_to_arrays(self.poses)[0]

    @property
    def thetas(self) -> np.ndarray:
        return poses_to_arrays(self.poses)[1]

    def path_lengths(self) -> np.ndarray:
        """Distancia acumulada recorrida en cada pose"""
        steps = np.linalg.norm(np.diff(self.positions, axis=0), axis=1)
        return np.concatenate([[0.0], np.cumsum(steps)])

    def transformed(self, transform: Pose2D) -> "Trajectory":
        """Trayectoria con cada pose premultiplicada por una transformación global"""
        return Trajectory(self.timestamps, [transform.compose(p) for p in self.poses])

    def pose_at(self, t: float) -> Pose2D:
        """Interpolación lineal de posición y ángulo en el instante t"""
        ts = self.timestamps
        if len(ts) == 0 or t < ts[0] - 1e-9 or t > ts[-1] + 1e-9:
            raise TrajectoryError(f"time {t} outside trajectory span")
        i = int(np.clip(np.searchsorted(ts, t, side="right") - 1, 0, max(len(ts) - 2, 0)))
        if len(ts) == 1:
            return self.poses[0]
        a, b = self.poses[i], self.poses[i + 1]
        alpha = float(np.clip((t - ts[i]) / (ts[i + 1] - ts[i]), 0.0, 1.0))
        return Pose2D(
            a.x + alpha * (b.x - a.x),
            a.y + alpha * (b.y - a.y),
            a.theta + alpha * normalize_angle(b.theta - a.theta),
        )


def format_tum_line(timestamp: float, pose: Pose2D) -> str:
    """`timestamp x y 0 0 0 sin(theta/2) cos(theta/2)`"""
    half = 0.5 * pose.theta
    return (f"{timestamp:.6f} {pose.x:.9g} {pose.y:.9g} 0 0 0 "
            f"{math.sin(half):.9g} {math.cos(half):.9g}")


def write_tum(trajectory: Trajectory, path: PathLike) -> None:
    lines = [format_tum_line(t, p) for t, p in trajectory]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="ascii")


def parse_tum(text: str, source: str = "<tum>") -> Trajectory:
    """
    Lee una trayectoria en formato TUM; el ángulo se recupera de (qz, qw)

    Args:
        text: Contenido del archivo
        source: Nombre para los mensajes de error

    Returns:
        Trajectory: Trayectoria planar
    """
    pairs = []
    for line_number, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 8:
            raise TrajectoryError(f"{source}:{line_number}: expected 8 fields, got {len(parts)}")
        try:
            t, x, y, _z, _qx, _qy, qz, qw = (float(v) for v in parts)
        except ValueError as e:
            raise TrajectoryError(f"{source}:{line_number}: {e}") from e
        pairs.append((t, Pose2D(x, y, 2.0 * math.atan2(qz, qw))))
    return Trajectory.from_pairs(pairs)


def read_tum(path: PathLike) -> Trajectory:
    path = Path(path)
    if not path.is_file():
        raise TrajectoryError(f"trajectory file not found: {path}")
    return parse_tum(path.read_text(encoding="ascii", errors="replace"), source=str(path))


@dataclass(frozen=True)
class AssociatedPoses:
    """Pares (estimación, referencia) asociados por marca de tiempo"""

    timestamps: np.ndarray
    est: List[Pose2D]
    gt: List[Pose2D]
    unmatched: int = 0

    def __len__(self) -> int:
        return len(self.est)


def associate(est: Trajectory, gt: Trajectory, tolerance: float = DEFAULT_TOLERANCE_S) -> AssociatedPoses:
    """Asocia cada pose estimada con la referencia más cercana en tiempo dentro de la tolerancia"""
    if len(est) == 0 or len(gt) == 0:
        return AssociatedPoses(np.zeros(0), [], [], len(est))

    gt_t = gt.timestamps
    pos = np.searchsorted(gt_t, est.timestamps)
    left = np.clip(pos - 1, 0, len(gt_t) - 1)
    right = np.clip(pos, 0, len(gt_t) - 1)
    nearest = np.where(np.abs(gt_t[left] - est.timestamps) <= np.abs(gt_t[right] - est.timestamps), left, right)
    ok = np.abs(gt_t[nearest] - est.timestamps) <= tolerance

    est_idx, gt_idx = [], []
    for i in np.flatnonzero(ok):
        j = int(nearest[i])
        if gt_idx and j <= gt_idx[-1]:
            continue
        est_idx.append(int(i))
        gt_idx.append(j)

    unmatched = len(est) - len(est_idx)
    if unmatched:
        logger.warning("%d poses sin asociación dentro de %.3f s", unmatched, tolerance)
    return AssociatedPoses(est.timestamps[est_idx], [est.poses[i] for i in est_idx],
                           [gt.poses[j] for j in gt_idx], unmatched)


@dataclass(frozen=True)
class SegmentError:
    first_index: int
    length_m: float
    translation_error_m: float
    rotation_error_rad: float


def kitti_segment_errors(est: Trajectory, gt: Trajectory,
                         segment_lengths_m: Sequence[float] = DEFAULT_SEGMENTS_M,
                         tolerance: float = DEFAULT_TOLERANCE_S) -> List[SegmentError]:
    """Errores relativos de cada segmento (inicio, longitud) según la convención KITTI"""
    pairs = associate(est, gt, tolerance)
    if len(pairs) < 2:
        raise TrajectoryError("trajectory too short: fewer than 2 associated poses")

    distances = Trajectory(pairs.timestamps, pairs.gt).path_lengths()
    n = len(pairs)
    errors: List[SegmentError] = []
    for first in range(n):
        for length in segment_lengths_m:
            # primera pose cuya distancia acumulada alcanza inicio + L
            last = int(np.searchsorted(distances, distances[first] + length, side="left"))
            if last >= n:
                continue
            gt_delta = pairs.gt[first].between(pairs.gt[last])
            est_delta = pairs.est[first].between(pairs.est[last])
            error = gt_delta.between(est_delta)
            errors.append(SegmentError(first, float(length), error.translation_norm(), abs(error.theta)))

    if not errors:
        raise TrajectoryError(
            f"trajectory too short: path length {distances[-1]:.2f} m < shortest segment {min(segment_lengths_m)} m")
    return errors


def kitti_errors(est: Trajectory, gt: Trajectory, segment_lengths_m: Sequence[float] = DEFAULT_SEGMENTS_M,
                 tolerance: float = DEFAULT_TOLERANCE_S) -> Tuple[float, float]:
    """
    Error medio de traslación (%) y de rotación (grados/100 m)

    Returns:
        (translation_percent, deg_per_100m)
    """
    segments = kitti_segment_errors(est, gt, segment_lengths_m, tolerance)
    t_rel = np.array([s.translation_error_m / s.length_m for s in segments])
    r_rel = np.array([s.rotation_error_rad / s.length_m for s in segments])
    return float(t_rel.mean() * 100.0), float(r_rel.mean() * (180.0 / math.pi) * 100.0)


def rpe(est: Trajectory, gt: Trajectory, delta_frames: int = 1, tolerance: float = DEFAULT_TOLERANCE_S) -> float:
    """Error relativo de pose (RMS de la traslación), en centímetros"""
    if delta_frames < 1:
        raise ValueError(f"delta_frames must be >= 1, got {delta_frames}")
    pairs = associate(est, gt, tolerance)
    n = len(pairs)
    if n < delta_frames + 1:
        raise TrajectoryError(f"trajectory too short: {n} associated poses for RPE delta {delta_frames}")

    sq = []
    for i in range(n - delta_frames):
        gt_delta = pairs.gt[i].between(pairs.gt[i + delta_frames])
        est_delta = pairs.est[i].between(pairs.est[i + delta_frames])
        sq.append(gt_delta.between(est_delta).translation_norm() ** 2)
    return float(math.sqrt(np.mean(sq)) * 100.0)


def ate(est: Trajectory, gt: Trajectory, tolerance: float = DEFAULT_TOLERANCE_S) -> float:
    """Error absoluto de trayectoria (RMSE de posición tras alineación rígida), en metros"""
    pairs = associate(est, gt, tolerance)
    if len(pairs) < 2:
        raise TrajectoryError(f"trajectory too short: {len(pairs)} associated poses for ATE")

    est_xy = poses_to_arrays(pairs.est)[0]
    gt_xy = poses_to_arrays(pairs.gt)[0]
    alignment = fit_rigid_transform(est_xy, gt_xy)
    residuals = alignment.transform_points(est_xy) - gt_xy
    return float(math.sqrt(np.mean(np.sum(residuals ** 2, axis=1))))


@dataclass
class MetricsReport:
    """Resumen de métricas de una estimación frente a la referencia"""

    rpe_cm: float
    ate_m: float
    translation_percent: Optional[float] = None
    deg_per_100m: Optional[float] = None
    associated_poses: int = 0
    unmatched_poses: int = 0
    segments: List[SegmentError] = field(default_factory=list)

    def rows(self) -> List[Tuple[str, float, str]]:
        rows = []
        if self.translation_percent is not None:
            rows.append(("translation_error", self.translation_percent, "percent"))
            rows.append(("rotation_error", self.deg_per_100m, "deg/100m"))
        rows.append(("rpe", self.rpe_cm, "cm"))
        rows.append(("ate", self.ate_m, "m"))
        rows.append(("associated_poses", self.associated_poses, "count"))
        rows.append(("unmatched_poses", self.unmatched_poses, "count"))
        return rows


def evaluate_trajectories(est: Trajectory, gt: Trajectory,
                          segment_lengths_m: Sequence[float] = DEFAULT_SEGMENTS_M,
                          rpe_delta: int = 1, tolerance: float = DEFAULT_TOLERANCE_S,
                          require_kitti: bool = False) -> MetricsReport:
    """
    Calcula todas las métricas

    Las métricas KITTI se omiten si la trayectoria es más corta que el
    segmento mínimo, salvo que require_kitti sea True.
    """
    pairs = associate(est, gt, tolerance)
    report = MetricsReport(
        rpe_cm=rpe(est, gt, rpe_delta, tolerance),
        ate_m=ate(est, gt, tolerance),
        associated_poses=len(pairs),
        unmatched_poses=pairs.unmatched,
    )
    try:
        segments = kitti_segment_errors(est, gt, segment_lengths_m, tolerance)
    except TrajectoryError:
        if require_kitti:
            raise
        logger.info("Trayectoria demasiado corta para las métricas KITTI; se omiten")
        return report

    t_rel = np.array([s.translation_error_m / s.length_m for s in segments])
    r_rel = np.array([s.rotation_error_rad / s.length_m for s in segments])
    report.translation_percent = float(t_rel.mean() * 100.0)
    report.deg_per_100m = float(r_rel.mean() * (180.0 / math.pi) * 100.0)
    report.segments = segments
    return report


def write_metrics_csv(report: MetricsReport, path: PathLike) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["metric", "value", "unit"])
        for name, value, unit in report.rows():
            writer.writerow([name, repr(value) if isinstance(value, float) else value, unit])


def write_segments_csv(segments: Sequence[SegmentError], path: PathLike) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["first_index", "length_m", "translation_error_m", "rotation_error_deg"])
        for s in segments:
            writer.writerow([s.first_index, s.length_m, repr(s.translation_error_m),
                             repr(math.degrees(s.rotation_error_rad))])
