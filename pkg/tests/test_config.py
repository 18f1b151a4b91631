"""
Tests para la configuración del pipeline
"""

import math

import pytest

from src.config import (
    RunConfig,
    Settings,
    build_run_config,
    dump_config,
    load_run_config,
    parse_config_text,
)
from src.errors import ConfigError
from src.surface import SmoothingMode


def test_defaults_round_trip():
    """Test de que los valores por defecto impresos vuelven a leerse igual"""
    assert build_run_config(parse_config_text(dump_config())) == RunConfig()


def test_custom_values_round_trip():
    """Test de configuración modificada impresa y leída de nuevo"""
    config = load_run_config(overrides=[
        "surface.smoothing=symmetric", "eval.segments=10, 20.5", "icp.enabled=false", "register.tol=1e-8",
    ])
    assert build_run_config(parse_config_text(dump_config(config))) == config


def test_every_key_is_printed():
    """Test de que el volcado incluye todas las claves"""
    text = dump_config()
    for section_name, section in RunConfig().__dict__.items():
        for key in section.__fields__:
            assert f"{section_name}.{key} = " in text


def test_file_and_overrides(tmp_path):
    """Test de archivo con comentarios y overrides posteriores"""
    path = tmp_path / "run.cfg"
    path.write_text(
        "# ajustes de prueba\n"
        "filter.k = 8\n"
        "surface.smoothing = gaussian  # suavizado completo\n"
        "\n"
        "keyframe.window_size = 6\n",
        encoding="utf-8",
    )
    config = load_run_config(path, overrides=["filter.k=5"])
    assert config.filter.k == 5
    assert config.surface.smoothing is SmoothingMode.GAUSSIAN
    assert config.keyframe.window_size == 6
    assert config.register.radius == 3.5


@pytest.mark.parametrize("override", [
    "filter.unknown=1",
    "nosection.k=1",
    "filter.k=0",
    "surface.smoothing=median",
    "eval.segments=-5",
    "sim.speckle_prob=2",
])
def test_invalid_values_rejected(override):
    """Test de claves desconocidas y valores fuera de rango"""
    with pytest.raises(ConfigError, match="invalid configuration"):
        load_run_config(overrides=[override])


@pytest.mark.parametrize("text", ["filter.k 12", "k = 12", "a.b.c = 1"])
def test_malformed_lines_rejected(text):
    """Test de líneas mal formadas"""
    with pytest.raises(ConfigError):
        parse_config_text(text)


def test_missing_config_file(tmp_path):
    """Test de archivo de configuración inexistente"""
    with pytest.raises(ConfigError, match="not found"):
        load_run_config(tmp_path / "missing.cfg")


def test_segments_from_comma_list():
    """Test de lista de segmentos separada por comas"""
    config = load_run_config(overrides=["eval.segments=50, 100,150"])
    assert config.eval.segments == [50.0, 100.0, 150.0]


def test_odometry_config_mapping():
    """Test de conversión a la configuración del pipeline"""
    config = load_run_config(overrides=[
        "keyframe.min_rotation_deg=10", "motion.compensate=false", "filter.z_min=40", "icp.max_corr_dist=1.5",
    ])
    odometry = config.to_odometry_config()
    assert odometry.keyframe_min_rotation_rad == pytest.approx(math.radians(10))
    assert odometry.compensation.enabled is False
    assert odometry.filter.z_min == 40.0
    assert odometry.icp.max_corr_dist_m == 1.5
    assert odometry.window_size == 4


def test_default_odometry_config_matches_dataclass_defaults():
    """Test de coherencia entre los valores por defecto de ambas capas"""
    odometry = RunConfig().to_odometry_config()
    assert odometry.registration.correspondence_radius_m == 3.5
    assert odometry.surface.smoothing is SmoothingMode.NONE
    assert odometry.keyframe_min_rotation_rad == pytest.approx(math.radians(5))


def test_sim_config_mapping():
    """Test de conversión a la configuración del simulador"""
    sim = load_run_config(overrides=["sim.seed=7", "sim.azimuth_count=128"]).to_sim_config()
    assert sim.seed == 7
    assert sim.azimuth_count == 128


def test_settings_from_environment(monkeypatch):
    """Test de Settings leídos del entorno"""
    monkeypatch.setenv("LOG_LEVEL", "DEBUG")
    monkeypatch.setenv("MAX_UPLOAD_SIZE_MB", "5")
    settings = Settings()
    assert settings.LOG_LEVEL == "DEBUG"
    assert settings.MAX_UPLOAD_SIZE_MB == 5.0
