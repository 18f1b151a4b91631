"""
Orquestación del pipeline de odometría: filtrado, compensación, puntos de
superficie, registro contra la ventana de keyframes y refinamiento ICP
"""

import csv
import logging
import math
from collections import deque
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Deque, Iterable, Iterator, List, Optional, Tuple, Union

import numpy as np

from .errors import ConfigError, DegenerateRegistrationError
from .evaluation import Trajectory
from .geometry import Pose2D, Velocity2D
from .motion import CompensationConfig, compensate
from .prefilter import FilterConfig, k_strongest_filter
from .register import IcpConfig, RegistrationConfig, icp_refine, register
from .surface import SurfaceConfig, SurfacePointSet, build_surface_points
from .sweep_io import PolarSweep

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


@dataclass(frozen=True)
class OdometryConfig:
    """Configuración completa del pipeline"""

    keyframe_min_translation_m: float = 1.5
    keyframe_min_rotation_rad: float = math.radians(5.0)
    window_size: int = 4
    filter: FilterConfig = field(default_factory=FilterConfig)
    compensation: CompensationConfig = field(default_factory=CompensationConfig)
    surface: SurfaceConfig = field(default_factory=SurfaceConfig)
    registration: RegistrationConfig = field(default_factory=RegistrationConfig)
    icp: IcpConfig = field(default_factory=IcpConfig)

    def __post_init__(self):
        if self.window_size < 1:
            raise ConfigError(f"window_size must be >= 1, got {self.window_size}")
        if not self.keyframe_min_translation_m > 0:
            raise ConfigError(f"keyframe translation threshold must be positive, got {self.keyframe_min_translation_m}")
        if not self.keyframe_min_rotation_rad > 0:
            raise ConfigError(f"keyframe rotation threshold must be positive, got {self.keyframe_min_rotation_rad}")


@dataclass(frozen=True, eq=False)
class Keyframe:
    """Barrido de referencia: puntos de superficie y pose en el marco de odometría"""

    surface_points: SurfacePointSet
    pose: Pose2D
    timestamp_s: float

    def __post_init__(self):
        if not self.pose.is_finite():
            raise ValueError(f"keyframe pose must be finite, got {self.pose}")


class KeyframeWindow:
    """Ventana deslizante de keyframes; el más antiguo sale primero"""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ConfigError(f"window capacity must be >= 1, got {capacity}")
        self.capacity = capacity
        self._frames: Deque[Keyframe] = deque(maxlen=capacity)

    def push(self, keyframe: Keyframe) -> None:
        if self._frames and keyframe.timestamp_s <= self._frames[-1].timestamp_s:
            raise ValueError("keyframe timestamps must be strictly increasing")
        self._frames.append(keyframe)

    @property
    def frames(self) -> List[Keyframe]:
        return list(self._frames)

    @property
    def last(self) -> Optional[Keyframe]:
        return self._frames[-1] if self._frames else None

    def registration_targets(self) -> List[Tuple[SurfacePointSet, Pose2D]]:
        return [(kf.surface_points, kf.pose) for kf in self._frames]

    def __len__(self) -> int:
        return len(self._frames)

    def __iter__(self) -> Iterator[Keyframe]:
        return iter(self._frames)


@dataclass
class SweepDiagnostics:
    """Resumen por barrido, una fila del CSV de diagnóstico"""

    index: int
    timestamp_s: float
    filtered_points: int = 0
    surface_points: int = 0
    correspondence_count: int = 0
    final_cost: float = 0.0
    iterations: int = 0
    icp_fitness: float = math.nan
    icp_accepted: bool = False
    keyframe_created: bool = False
    fallback: bool = False


@dataclass
class OdometryState:
    """Estado mutable del pipeline; un único propietario a la vez"""

    config: OdometryConfig
    window: KeyframeWindow
    last_pose: Optional[Pose2D] = None
    last_timestamp_s: Optional[float] = None
    last_relative: Pose2D = field(default_factory=Pose2D.identity)
    velocity: Velocity2D = field(default_factory=Velocity2D.zero)
    previous_means: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)))
    sweep_count: int = 0

    @classmethod
    def initial(cls, config: OdometryConfig) -> "OdometryState":
        return cls(config=config, window=KeyframeWindow(config.window_size))


def should_create_keyframe(last_kf_pose: Pose2D, pose: Pose2D, cfg: OdometryConfig) -> bool:
    relative = last_kf_pose.between(pose)
    return (relative.translation_norm() > cfg.keyframe_min_translation_m
            or abs(relative.theta) > cfg.keyframe_min_rotation_rad)


def extract_surface_points(sweep: PolarSweep, velocity: Velocity2D, cfg: OdometryConfig) -> Tuple[int, SurfacePointSet]:
    """Filtrado, compensación y puntos de superficie de un barrido"""
    cloud = k_strongest_filter(sweep, cfg.filter)
    if cfg.compensation.enabled:
        cloud = compensate(cloud, velocity, sweep.sweep_duration_s, sweep.azimuth_count)
    surface = build_surface_points(cloud, cfg.surface.resolution_m, cfg.filter.z_min,
                                   cfg.surface.min_points, cfg.surface.smoothing)
    return len(cloud), surface


def process_sweep(state: OdometryState, sweep: PolarSweep) -> Tuple[OdometryState, Pose2D, SweepDiagnostics]:
    """
    Estima la pose de un barrido

    Args:
        state: Estado del pipeline; se actualiza en el lugar
        sweep: Barrido siguiente en orden temporal

    Returns:
        (estado, pose, diagnóstico)
    """
    cfg = state.config
    t = sweep.sweep_center_time_s
    if state.last_timestamp_s is not None and t <= state.last_timestamp_s:
        raise ValueError(f"sweeps must arrive in strictly increasing time order ({t} <= {state.last_timestamp_s})")

    diagnostics = SweepDiagnostics(index=state.sweep_count, timestamp_s=t)
    diagnostics.filtered_points, surface = extract_surface_points(sweep, state.velocity, cfg)
    diagnostics.surface_points = len(surface)

    if state.last_pose is None:
        pose = Pose2D.identity()
        state.window.push(Keyframe(surface, pose, t))
        diagnostics.keyframe_created = True
        _advance(state, pose, t, surface)
        return state, pose, diagnostics

    last_pose = state.last_pose
    predicted = last_pose.compose(state.last_relative)
    try:
        result = register(surface, state.window.registration_targets(), predicted, cfg.registration)
        pose = result.pose
        diagnostics.correspondence_count = result.correspondence_count
        diagnostics.final_cost = result.final_cost
        diagnostics.iterations = result.iterations
    except DegenerateRegistrationError as e:
        logger.warning("Barrido %d (t=%.3f): %s; se usa la predicción de velocidad constante",
                       diagnostics.index, t, e)
        pose = predicted
        diagnostics.correspondence_count = e.correspondence_count
        diagnostics.fallback = True

    if cfg.icp.enabled and not diagnostics.fallback:
        icp = icp_refine(surface, state.previous_means, last_pose.between(pose),
                         fitness_threshold=cfg.icp.fitness_threshold,
                         max_corr_dist=cfg.icp.max_corr_dist_m,
                         max_iterations=cfg.icp.max_iterations,
                         min_correspondences=cfg.registration.min_correspondences)
        diagnostics.icp_fitness = icp.fitness
        diagnostics.icp_accepted = icp.accepted
        if icp.accepted:
            pose = last_pose.compose(icp.pose)

    relative = last_pose.between(pose)
    state.velocity = Velocity2D.from_relative_pose(relative, t - state.last_timestamp_s)
    state.last_relative = relative

    if not diagnostics.fallback:
        last_keyframe = state.window.last
        # un keyframe sin puntos no sirve como referencia: se reemplaza en cuanto haya uno útil
        bootstrap = len(last_keyframe.surface_points) == 0 and len(surface) > 0
        if bootstrap or should_create_keyframe(last_keyframe.pose, pose, cfg):
            state.window.push(Keyframe(surface, pose, t))
            diagnostics.keyframe_created = True

    logger.debug("Barrido %d: pose (%.3f, %.3f, %.4f), %d correspondencias",
                 diagnostics.index, pose.x, pose.y, pose.theta, diagnostics.correspondence_count)
    _advance(state, pose, t, surface)
    return state, pose, diagnostics


def _advance(state: OdometryState, pose: Pose2D, t: float, surface: SurfacePointSet) -> None:
    state.last_pose = pose
    state.last_timestamp_s = t
    state.previous_means = surface.means
    state.sweep_count += 1


@dataclass
class OdometryRun:
    """Resultado de procesar una secuencia completa"""

    trajectory: Trajectory
    diagnostics: List[SweepDiagnostics]
    keyframe_count: int = 0

    @property
    def fallback_count(self) -> int:
        return sum(d.fallback for d in self.diagnostics)

    @property
    def fallback_ratio(self) -> float:
        return self.fallback_count / len(self.diagnostics) if self.diagnostics else 0.0


class RadarOdometry:
    """
    Ejecuta el pipeline sobre una secuencia de barridos

    Los barridos pueden ser objetos PolarSweep o rutas a archivos RPS1.
    """

    def __init__(self, config: Optional[OdometryConfig] = None):
        self.config = config or OdometryConfig()
        self.state = OdometryState.initial(self.config)

    def process(self, sweep: PolarSweep) -> Tuple[Pose2D, SweepDiagnostics]:
        self.state, pose, diagnostics = process_sweep(self.state, sweep)
        return pose, diagnostics

    def run(self, sweeps: Iterable[PolarSweep]) -> OdometryRun:
        pairs, diagnostics = [], []
        keyframes = 0
        for sweep in sweeps:
            pose, diag = self.process(sweep)
            pairs.append((sweep.sweep_center_time_s, pose))
            diagnostics.append(diag)
            keyframes += diag.keyframe_created
        run = OdometryRun(Trajectory.from_pairs(pairs), diagnostics, keyframes)
        logger.info("Odometría: %d barridos, %d keyframes, %d fallbacks",
                    len(diagnostics), keyframes, run.fallback_count)
        return run


DIAGNOSTICS_COLUMNS = [f.name for f in fields(SweepDiagnostics)]


def write_diagnostics_csv(diagnostics: Iterable[SweepDiagnostics], path: PathLike) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=DIAGNOSTICS_COLUMNS)
        writer.writeheader()
        for diag in diagnostics:
            row = asdict(diag)
            row["timestamp_s"] = f"{diag.timestamp_s:.6f}"
            row["final_cost"] = f"{diag.final_cost:.9g}"
            row["icp_fitness"] = f"{diag.icp_fitness:.9g}"
            row["icp_accepted"] = int(diag.icp_accepted)
            row["keyframe_created"] = int(diag.keyframe_created)
            row["fallback"] = int(diag.fallback)
            writer.writerow(row)
