"""
Simulador sintético de radar giratorio: genera barridos polares con
distorsión por movimiento y trayectoria de referencia
"""

import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, List, Optional, Tuple, Union

import numpy as np
from tqdm import tqdm

from .errors import SimulationError, TrajectoryError
from .evaluation import Trajectory, write_tum
from .geometry import TWO_PI, Pose2D, normalize_angle
from .motion import azimuth_time_offsets
from .sweep_io import SWEEP_SUFFIX, PolarSweep, save_sweep

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
PoseFunction = Callable[[float], Pose2D]

BLOB_SIGMA_BINS = 1.0
BLOB_HALF_WIDTH_BINS = 4
PANEL_LENGTH_M = 1.0
PANEL_PITCH_M = (7.5, 10.0)
PANEL_CORNER_MARGIN_M = 5.0
PANEL_MAX_TILT_RAD = math.radians(45.0)
GROUND_TRUTH_FILE = "gt.tum"
CORRUPTED_FILE = "corrupted.txt"


@dataclass(frozen=True)
class SimConfig:
    """Parámetros del sensor simulado y del ruido"""

    azimuth_count: int = 400
    range_bin_count: int = 1000
    range_resolution_m: float = 0.1
    sweep_duration_s: float = 0.25
    noise_std: float = 5.0
    speckle_prob: float = 0.01
    corruption_prob: float = 0.0
    seed: int = 42

    def __post_init__(self):
        if self.azimuth_count < 1 or self.range_bin_count < 1:
            raise SimulationError("azimuth_count and range_bin_count must be >= 1")
        if not self.range_resolution_m > 0:
            raise SimulationError(f"non-positive range resolution: {self.range_resolution_m}")
        if not self.sweep_duration_s > 0:
            raise SimulationError(f"non-positive sweep duration: {self.sweep_duration_s}")
        if self.noise_std < 0:
            raise SimulationError(f"noise_std must be >= 0, got {self.noise_std}")
        for name in ("speckle_prob", "corruption_prob"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise SimulationError(f"{name} must be in [0, 1], got {getattr(self, name)}")

    @property
    def max_range_m(self) -> float:
        return self.range_bin_count * self.range_resolution_m


@dataclass(frozen=True, eq=False)
class World:
    """Landmarks puntuales (x, y, reflectividad)"""

    landmarks: np.ndarray

    def __post_init__(self):
        landmarks = np.asarray(self.landmarks, dtype=float).reshape(-1, 3)
        if not np.all(np.isfinite(landmarks)):
            raise SimulationError("landmark values must be finite")
        reflectivity = landmarks[:, 2]
        if np.any((reflectivity < 1) | (reflectivity > 255)):
            raise SimulationError("landmark reflectivity must be in [1, 255]")
        landmarks.setflags(write=False)
        object.__setattr__(self, "landmarks", landmarks)

    def __len__(self) -> int:
        return len(self.landmarks)

    @property
    def positions(self) -> np.ndarray:
        return self.landmarks[:, :2]

    @property
    def reflectivity(self) -> np.ndarray:
        return self.landmarks[:, 2]


def load_world(path: PathLike) -> World:
    """Lee un mundo en CSV `x,y,reflectivity`; la cabecera es opcional"""
    rows = []
    with open(path, newline="", encoding="utf-8") as f:
        for line_number, row in enumerate(csv.reader(f), start=1):
            if not row or row[0].strip().startswith("#"):
                continue
            try:
                rows.append([float(v) for v in row[:3]])
            except ValueError as e:
                if line_number == 1:
                    continue
                raise SimulationError(f"{path}:{line_number}: {e}") from e
            if len(row) < 3:
                raise SimulationError(f"{path}:{line_number}: expected x,y,reflectivity")
    return World(np.array(rows, dtype=float).reshape(-1, 3))


def save_world(world: World, path: PathLike) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["x", "y", "reflectivity"])
        for x, y, z in world.landmarks:
            writer.writerow([repr(float(x)), repr(float(y)), repr(float(z))])


def _sweep_rng(cfg: SimConfig, index: int) -> np.random.Generator:
    return np.random.default_rng([cfg.seed, index])


class _AzimuthPoses:
    """Pose del sensor en el instante de cada acimut, como arreglos"""

    def __init__(self, pose_fn: PoseFunction, center_time: float, cfg: SimConfig):
        offsets = azimuth_time_offsets(np.arange(cfg.azimuth_count), cfg.azimuth_count, cfg.sweep_duration_s)
        poses = [pose_fn(center_time + dt) for dt in offsets]
        self.x = np.array([p.x for p in poses])
        self.y = np.array([p.y for p in poses])
        self.cos = np.cos([p.theta for p in poses])
        self.sin = np.sin([p.theta for p in poses])

    def local(self, azimuths: np.ndarray, positions: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Coordenadas de cada landmark en el marco del sensor de su acimut"""
        dx = positions[:, 0] - self.x[azimuths]
        dy = positions[:, 1] - self.y[azimuths]
        c, s = self.cos[azimuths], self.sin[azimuths]
        return c * dx + s * dy, c * dy - s * dx


def _visible_returns(world: World, poses: _AzimuthPoses, cfg: SimConfig) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(acimut, rango, reflectividad) de cada landmark dentro de un haz"""
    n_a = cfg.azimuth_count
    positions = world.positions
    half_beam = math.pi / n_a

    # el acimut que ve a un landmark es un punto fijo: la pose apenas cambia entre acimuts vecinos
    azimuths = np.full(len(world), n_a // 2)
    for _ in range(4):
        lx, ly = poses.local(azimuths, positions)
        azimuths = np.rint(np.arctan2(ly, lx) * n_a / TWO_PI).astype(np.int64) % n_a

    hit_azimuths, hit_ranges, hit_reflectivity = [], [], []
    for shift in (-1, 0, 1):
        candidates = (azimuths + shift) % n_a
        lx, ly = poses.local(candidates, positions)
        ranges = np.hypot(lx, ly)
        bearing = np.arctan2(ly, lx) - TWO_PI * candidates / n_a
        bearing = np.remainder(bearing + math.pi, TWO_PI) - math.pi
        visible = (np.abs(bearing) < half_beam) | np.isclose(bearing, -half_beam)
        visible &= ranges < cfg.max_range_m
        hit_azimuths.append(candidates[visible])
        hit_ranges.append(ranges[visible])
        hit_reflectivity.append(world.reflectivity[visible])
    return np.concatenate(hit_azimuths), np.concatenate(hit_ranges), np.concatenate(hit_reflectivity)


def render_intensities(world: World, pose_fn: PoseFunction, center_time: float, cfg: SimConfig) -> np.ndarray:
    """Imagen polar sin ruido: cada acimut se observa desde la pose de su propio instante"""
    n_a, n_r = cfg.azimuth_count, cfg.range_bin_count
    image = np.zeros((n_a, n_r))
    if len(world) == 0:
        return image

    azimuths, ranges, reflectivity = _visible_returns(world, _AzimuthPoses(pose_fn, center_time, cfg), cfg)
    center_bins = ranges / cfg.range_resolution_m
    first_bins = center_bins.astype(np.int64) - BLOB_HALF_WIDTH_BINS
    for offset in range(2 * BLOB_HALF_WIDTH_BINS + 2):
        bins = first_bins + offset
        inside = (bins >= 0) & (bins < n_r)
        values = reflectivity * np.exp(-0.5 * ((bins - center_bins) / BLOB_SIGMA_BINS) ** 2)
        np.add.at(image, (azimuths[inside], bins[inside]), values[inside])
    return image


def _finish(image: np.ndarray, cfg: SimConfig, rng: np.random.Generator) -> np.ndarray:
    if cfg.noise_std > 0:
        image = image + rng.normal(0.0, cfg.noise_std, image.shape)
    if cfg.speckle_prob > 0:
        speckle = rng.random(image.shape) < cfg.speckle_prob
        image = np.where(speckle, rng.uniform(0.0, 255.0, image.shape), image)
    return np.rint(np.clip(image, 0.0, 255.0))


def render_sweep(world: World, pose_fn: PoseFunction, center_time: float, cfg: SimConfig,
                 index: int = 0) -> PolarSweep:
    """
    Renderiza un barrido con distorsión por movimiento

    Args:
        world: Landmarks del escenario
        pose_fn: Pose del robot en función del tiempo
        center_time: Instante central del barrido
        cfg: Parámetros del sensor y del ruido
        index: Índice del barrido; junto con la semilla fija el ruido

    Returns:
        PolarSweep: Intensidades enteras en [0, 255]
    """
    try:
        image = render_intensities(world, pose_fn, center_time, cfg)
    except TrajectoryError as e:
        raise SimulationError(f"pose function undefined over sweep at t={center_time}: {e}") from e
    image = _finish(image, cfg, _sweep_rng(cfg, index))
    return PolarSweep(image, cfg.range_resolution_m, center_time, cfg.sweep_duration_s)


def noise_sweep(center_time: float, cfg: SimConfig, index: int = 0) -> PolarSweep:
    """Barrido de ruido puro, sin estructura"""
    rng = np.random.default_rng([cfg.seed, index, 1])
    image = np.rint(rng.uniform(0.0, 255.0, (cfg.azimuth_count, cfg.range_bin_count)))
    return PolarSweep(image, cfg.range_resolution_m, center_time, cfg.sweep_duration_s)


def sweep_center_times(trajectory: Trajectory, cfg: SimConfig) -> np.ndarray:
    """Centros t0 + dT/2 + i*dT de todos los barridos cubiertos por la trayectoria"""
    if len(trajectory) < 2:
        raise SimulationError("ground-truth trajectory needs at least 2 poses")
    t0, t1 = float(trajectory.timestamps[0]), float(trajectory.timestamps[-1])
    count = int(math.floor((t1 - t0) / cfg.sweep_duration_s + 1e-9))
    if count < 1:
        raise SimulationError("ground-truth trajectory shorter than one sweep")
    return t0 + cfg.sweep_duration_s * (np.arange(count) + 0.5)


def corrupted_indices(count: int, cfg: SimConfig) -> List[int]:
    if cfg.corruption_prob <= 0:
        return []
    draws = np.random.default_rng([cfg.seed, count, 2]).random(count)
    return [int(i) for i in np.flatnonzero(draws < cfg.corruption_prob)]


def generate_sequence(world: World, trajectory: Trajectory, cfg: SimConfig, out_dir: PathLike,
                      progress: bool = False) -> List[Path]:
    """
    Escribe `NNNNNN.rps` por barrido y `gt.tum` con la pose en cada centro

    Returns:
        List[Path]: Archivos de barrido escritos, en orden
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    centers = sweep_center_times(trajectory, cfg)
    corrupted = set(corrupted_indices(len(centers), cfg))
    written = []
    for i, t in enumerate(tqdm(centers, desc="Simulando", unit="barrido", disable=not progress)):
        if i in corrupted:
            sweep = noise_sweep(float(t), cfg, i)
        else:
            sweep = render_sweep(world, trajectory.pose_at, float(t), cfg, i)
        path = out_dir / f"{i:06d}{SWEEP_SUFFIX}"
        save_sweep(sweep, path)
        written.append(path)

    write_tum(Trajectory(centers, [trajectory.pose_at(float(t)) for t in centers]), out_dir / GROUND_TRUTH_FILE)
    if cfg.corruption_prob > 0:
        lines = "".join(f"{i}\n" for i in sorted(corrupted))
        (out_dir / CORRUPTED_FILE).write_text(lines, encoding="ascii")
    logger.info("Secuencia simulada: %d barridos en %s (%d corrompidos)", len(written), out_dir, len(corrupted))
    return written


def _panel_landmarks(center: np.ndarray, angle: float, spacing: float, reflectivity: float) -> np.ndarray:
    count = int(math.ceil(PANEL_LENGTH_M / spacing)) + 1
    s = np.linspace(-PANEL_LENGTH_M / 2, PANEL_LENGTH_M / 2, count)
    points = center + s[:, None] * np.array([math.cos(angle), math.sin(angle)])
    return np.column_stack([points, np.full(count, reflectivity)])


def _rectangle_panels(half_w: float, half_h: float, spacing: float, reflectivity: float,
                      rng: np.random.Generator, dense_factor: int = 1) -> List[np.ndarray]:
    """Paneles inclinados a lo largo de los cuatro lados, lejos de las esquinas"""
    corners = np.array([(-half_w, -half_h), (half_w, -half_h), (half_w, half_h), (-half_w, half_h)])
    panels = []
    for k in range(4):
        start, end = corners[k], corners[(k + 1) % 4]
        length = float(np.linalg.norm(end - start))
        direction = (end - start) / length
        wall_angle = math.atan2(direction[1], direction[0])
        # el lado sur recibe la densidad extra
        side_spacing = spacing / dense_factor if k == 0 else spacing
        s = PANEL_CORNER_MARGIN_M
        while s <= length - PANEL_CORNER_MARGIN_M:
            tilt = rng.uniform(-PANEL_MAX_TILT_RAD, PANEL_MAX_TILT_RAD)
            panels.append(_panel_landmarks(start + s * direction, wall_angle + tilt, side_spacing, reflectivity))
            s += rng.uniform(*PANEL_PITCH_M)
    return panels


def rectangular_loop_world(width: float = 60.0, height: float = 40.0, corridor_half_width: float = 4.0,
                           landmark_spacing: float = 0.02, reflectivity: float = 255.0,
                           dense_factor: int = 1, seed: int = 0) -> World:
    """
    Pasillo rectangular alrededor de la trayectoria de `rectangular_loop_trajectory`

    Las paredes son paneles de 1 m con inclinación aleatoria, separados al
    menos 6 m entre sí: cada celda de la rejilla de superficie ve un único
    panel completo, así que su media no depende de la pose del sensor.

    Args:
        width: Ancho del rectángulo que recorre el robot
        height: Alto del rectángulo que recorre el robot
        corridor_half_width: Distancia de la trayectoria a cada pared
        landmark_spacing: Separación entre landmarks de un panel
        reflectivity: Reflectividad de todos los landmarks
        dense_factor: Multiplicador de densidad de los paneles del lado sur de la pared exterior
        seed: Semilla de la posición e inclinación de los paneles
    """
    if corridor_half_width <= 0 or dense_factor < 1:
        raise SimulationError("corridor_half_width must be positive and dense_factor >= 1")
    if not 0 < landmark_spacing <= PANEL_LENGTH_M:
        raise SimulationError(f"landmark spacing must be in (0, {PANEL_LENGTH_M}], got {landmark_spacing}")
    if corridor_half_width >= min(width, height) / 2:
        raise SimulationError("corridor too wide for the loop")
    rng = np.random.default_rng(seed)
    outer = _rectangle_panels(width / 2 + corridor_half_width, height / 2 + corridor_half_width,
                              landmark_spacing, reflectivity, rng, dense_factor)
    inner = _rectangle_panels(width / 2 - corridor_half_width, height / 2 - corridor_half_width,
                              landmark_spacing, reflectivity, rng)
    if not outer + inner:
        raise SimulationError("loop too small to hold any wall panel")
    return World(np.vstack(outer + inner))


def _rounded_rectangle_segments(width: float, height: float, radius: float) -> List[Tuple[str, float, Pose2D]]:
    """Tramos (tipo, longitud, pose inicial) en sentido antihorario desde el lado sur"""
    segments = []
    pose = Pose2D(-width / 2 + radius, -height / 2, 0.0)
    for straight in (width - 2 * radius, height - 2 * radius) * 2:
        segments.append(("line", straight, pose))
        pose = pose.compose(Pose2D(straight, 0.0, 0.0))
        segments.append(("arc", 0.5 * math.pi * radius, pose))
        pose = Pose2D(*_arc_point(pose, radius, 0.5 * math.pi * radius))
    return segments


def _arc_point(start: Pose2D, radius: float, u: float) -> Tuple[float, float, float]:
    theta, phi = start.theta, u / radius
    cx, cy = start.x - radius * math.sin(theta), start.y + radius * math.cos(theta)
    return (cx + radius * math.sin(theta + phi), cy - radius * math.cos(theta + phi), theta + phi)


def rectangular_loop_trajectory(width: float = 60.0, height: float = 40.0, corner_radius: float = 5.0,
                                duration_s: float = 100.0, rate_hz: float = 100.0,
                                start_time_s: float = 0.0) -> Trajectory:
    """Una vuelta a velocidad constante por un rectángulo de esquinas redondeadas"""
    if corner_radius <= 0 or 2 * corner_radius >= min(width, height):
        raise SimulationError("corner radius must be positive and fit the rectangle")
    if duration_s <= 0 or rate_hz <= 0:
        raise SimulationError("duration and rate must be positive")

    segments = _rounded_rectangle_segments(width, height, corner_radius)
    perimeter = sum(length for _, length, _ in segments)
    count = int(round(duration_s * rate_hz))
    times = start_time_s + np.arange(count + 1) / rate_hz

    poses = []
    for s in perimeter * np.arange(count + 1) / count:
        for kind, length, start in segments:
            if s <= length:
                break
            s -= length
        if kind == "line":
            poses.append(start.compose(Pose2D(s, 0.0, 0.0)))
        else:
            poses.append(Pose2D(*_arc_point(start, corner_radius, s)))
    return Trajectory(times, poses)


def straight_line_trajectory(speed_mps: float, duration_s: float, rate_hz: float = 100.0,
                             heading_rad: float = 0.0, start_time_s: float = 0.0) -> Trajectory:
    count = int(round(duration_s * rate_hz))
    times = start_time_s + np.arange(count + 1) / rate_hz
    heading = normalize_angle(heading_rad)
    offsets = (times - start_time_s) * speed_mps
    return Trajectory(times, [Pose2D(d * math.cos(heading), d * math.sin(heading), heading) for d in offsets])


def static_pose(pose: Optional[Pose2D] = None) -> PoseFunction:
    """Función de pose constante"""
    pose = pose or Pose2D.identity()
    return lambda t: pose
