"""
Configuración del sistema de odometría por radar

- Settings: parámetros del proceso (variables de entorno / .env)
- RunConfig: parámetros del pipeline, leídos de archivos `seccion.clave = valor`
"""

import logging
import math
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Set, Union

from pydantic import BaseModel, Extra, Field, ValidationError, validator
from pydantic_settings import BaseSettings

from .errors import ConfigError
from .evaluation import DEFAULT_SEGMENTS_M, DEFAULT_TOLERANCE_S
from .motion import CompensationConfig
from .odometry import OdometryConfig
from .prefilter import FilterConfig
from .register import IcpConfig, RegistrationConfig
from .simulator import SimConfig
from .surface import SmoothingMode, SurfaceConfig


class Settings(BaseSettings):
    """Configuración principal del proceso"""

    # Configuración general
    DEBUG: bool = False
    LOG_LEVEL: str = "INFO"
    SHOW_PROGRESS: bool = True

    # Configuración de la API
    API_TITLE: str = "Radar Odometry API"
    API_DESCRIPTION: str = "API de odometría por radar giratorio y evaluación de trayectorias"
    API_VERSION: str = "1.0.0"
    MAX_UPLOAD_SIZE_MB: float = 50.0

    # CORS
    CORS_ORIGINS: Set[str] = {"*"}

    class Config:
        env_file = ".env"
        case_sensitive = True


# Instancia global de configuración
settings = Settings()


def configure_logging(level: Optional[str] = None) -> None:
    logging.basicConfig(
        level=(level or settings.LOG_LEVEL).upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


class _Section(BaseModel):
    class Config:
        extra = Extra.forbid
        validate_assignment = True


class FilterSection(_Section):
    k: int = Field(FilterConfig.k_strongest, ge=1, description="Bins retenidos por acimut")
    z_min: float = Field(FilterConfig.z_min, ge=0, description="Umbral de ruido de intensidad")
    min_range_bin: int = Field(FilterConfig.min_range_bin, ge=0, description="Primer bin de rango utilizable")


class MotionSection(_Section):
    compensate: bool = Field(CompensationConfig.enabled, description="Compensación de distorsión por movimiento")


class SurfaceSection(_Section):
    resolution: float = Field(SurfaceConfig.resolution_m, gt=0, description="Tamaño de celda r (m)")
    min_points: int = Field(SurfaceConfig.min_points, ge=2, description="Mínimo de puntos por celda")
    smoothing: SmoothingMode = Field(SurfaceConfig.smoothing, description="none | gaussian | symmetric")


class RegisterSection(_Section):
    radius: float = Field(RegistrationConfig.correspondence_radius_m, gt=0)
    huber_delta: float = Field(RegistrationConfig.huber_delta, gt=0)
    max_iters: int = Field(RegistrationConfig.max_iterations, ge=1)
    tol: float = Field(RegistrationConfig.convergence_tol, gt=0)
    min_corr: int = Field(RegistrationConfig.min_correspondences, ge=1)


class IcpSection(_Section):
    enabled: bool = IcpConfig.enabled
    fitness_threshold: float = Field(IcpConfig.fitness_threshold, gt=0)
    max_corr_dist: float = Field(IcpConfig.max_corr_dist_m, gt=0)
    max_iters: int = Field(IcpConfig.max_iterations, ge=1)


class KeyframeSection(_Section):
    min_translation: float = Field(OdometryConfig.keyframe_min_translation_m, gt=0, description="Metros")
    min_rotation_deg: float = Field(5.0, gt=0)
    window_size: int = Field(OdometryConfig.window_size, ge=1)


class EvalSection(_Section):
    segments: List[float] = Field(list(DEFAULT_SEGMENTS_M), description="Longitudes de segmento KITTI (m)")
    rpe_delta: int = Field(1, ge=1)
    tolerance: float = Field(DEFAULT_TOLERANCE_S, gt=0, description="Tolerancia de asociación (s)")

    @validator("segments", pre=True)
    def split_segments(cls, value):
        if isinstance(value, str):
            return [v.strip() for v in value.split(",") if v.strip()]
        return value

    @validator("segments")
    def positive_segments(cls, value):
        if not value or any(v <= 0 for v in value):
            raise ValueError("segments must be a non-empty list of positive lengths")
        return value


class SimSection(_Section):
    azimuth_count: int = Field(SimConfig.azimuth_count, ge=1)
    range_bin_count: int = Field(SimConfig.range_bin_count, ge=1)
    range_resolution: float = Field(SimConfig.range_resolution_m, gt=0)
    sweep_duration: float = Field(SimConfig.sweep_duration_s, gt=0)
    noise_std: float = Field(SimConfig.noise_std, ge=0)
    speckle_prob: float = Field(SimConfig.speckle_prob, ge=0, le=1)
    corruption_prob: float = Field(SimConfig.corruption_prob, ge=0, le=1)
    seed: int = SimConfig.seed


class RunConfig(_Section):
    """Todas las secciones del pipeline; cada clave tiene un valor por defecto"""

    filter: FilterSection = Field(default_factory=FilterSection)
    motion: MotionSection = Field(default_factory=MotionSection)
    surface: SurfaceSection = Field(default_factory=SurfaceSection)
    register: RegisterSection = Field(default_factory=RegisterSection)
    icp: IcpSection = Field(default_factory=IcpSection)
    keyframe: KeyframeSection = Field(default_factory=KeyframeSection)
    eval: EvalSection = Field(default_factory=EvalSection)
    sim: SimSection = Field(default_factory=SimSection)

    def to_odometry_config(self) -> OdometryConfig:
        return OdometryConfig(
            keyframe_min_translation_m=self.keyframe.min_translation,
            keyframe_min_rotation_rad=math.radians(self.keyframe.min_rotation_deg),
            window_size=self.keyframe.window_size,
            filter=FilterConfig(self.filter.k, self.filter.z_min, self.filter.min_range_bin),
            compensation=CompensationConfig(self.motion.compensate),
            surface=SurfaceConfig(self.surface.resolution, self.surface.min_points, self.surface.smoothing),
            registration=RegistrationConfig(self.register.radius, self.register.huber_delta,
                                            self.register.max_iters, self.register.tol,
                                            self.register.min_corr),
            icp=IcpConfig(self.icp.enabled, self.icp.fitness_threshold, self.icp.max_corr_dist,
                          self.icp.max_iters),
        )

    def to_sim_config(self) -> SimConfig:
        s = self.sim
        return SimConfig(s.azimuth_count, s.range_bin_count, s.range_resolution, s.sweep_duration,
                         s.noise_std, s.speckle_prob, s.corruption_prob, s.seed)


def _split_assignment(text: str, separator: str, source: str) -> Dict[str, Dict[str, str]]:
    if separator not in text:
        raise ConfigError(f"{source}: expected 'section.key {separator} value', got {text!r}")
    name, value = (part.strip() for part in text.split(separator, 1))
    if name.count(".") != 1 or not all(name.split(".")):
        raise ConfigError(f"{source}: key must look like 'section.key', got {name!r}")
    section, key = name.split(".")
    return {section: {key: value}}


def _merge(target: Dict[str, Dict[str, str]], update: Dict[str, Dict[str, str]]) -> None:
    for section, values in update.items():
        target.setdefault(section, {}).update(values)


def parse_config_text(text: str, source: str = "<config>") -> Dict[str, Dict[str, str]]:
    """
    Lee líneas `seccion.clave = valor`; `#` inicia un comentario

    Returns:
        Dict: Valores crudos agrupados por sección
    """
    raw: Dict[str, Dict[str, str]] = {}
    for line_number, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if line:
            _merge(raw, _split_assignment(line, "=", f"{source}:{line_number}"))
    return raw


def build_run_config(raw: Dict[str, Dict[str, str]]) -> RunConfig:
    try:
        return RunConfig.parse_obj(raw)
    except ValidationError as e:
        problems = "; ".join(
            f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors())
        raise ConfigError(f"invalid configuration: {problems}") from e


def load_run_config(path: Optional[Union[str, Path]] = None, overrides: Sequence[str] = ()) -> RunConfig:
    """
    Construye la configuración desde un archivo opcional y overrides `seccion.clave=valor`

    Args:
        path: Archivo de configuración
        overrides: Asignaciones aplicadas después del archivo

    Returns:
        RunConfig: Configuración validada
    """
    raw: Dict[str, Dict[str, str]] = {}
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        raw = parse_config_text(path.read_text(encoding="utf-8"), source=str(path))
    for override in overrides:
        _merge(raw, _split_assignment(override, "=", "--set"))
    return build_run_config(raw)


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, SmoothingMode):
        return value.value
    if isinstance(value, (list, tuple)):
        return ", ".join(_format_value(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def dump_config(config: Optional[RunConfig] = None) -> str:
    """Texto con todas las claves; vuelve a leerse como una configuración igual"""
    config = config or RunConfig()
    lines = []
    for section_name in RunConfig.__fields__:
        section = getattr(config, section_name)
        lines.append(f"# {section_name}")
        for key in section.__fields__:
            lines.append(f"{section_name}.{key} = {_format_value(getattr(section, key))}")
        lines.append("")
    return "\n".join(lines)
