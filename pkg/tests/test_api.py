"""
Tests para la API HTTP
"""

import numpy as np
import pytest
from fastapi.testclient import TestClient

from src.evaluation import Trajectory, format_tum_line
from src.geometry import Pose2D
from src.main import app
from src.simulator import render_sweep, static_pose
from src.sweep_io import PolarSweep, encode_sweep


@pytest.fixture
def client():
    return TestClient(app)


def _tum(trajectory):
    return "".join(format_tum_line(t, p) + "\n" for t, p in trajectory).encode("ascii")


def _line(n=41, step=0.5):
    return Trajectory(np.arange(n, dtype=float), [Pose2D(step * i, 0.0, 0.0) for i in range(n)])


def test_startup_configures_logging(monkeypatch):
    """Test de configuración del logging al arrancar la aplicación"""
    calls = []
    monkeypatch.setattr("src.main.configure_logging", lambda *args: calls.append(args))
    with TestClient(app):
        pass
    assert calls == [()]


def test_root_and_health(client):
    """Test de los endpoints de estado"""
    assert client.get("/").json()["status"] == "online"
    response = client.get("/health")
    assert response.status_code == 200
    assert response.json()["status"] == "healthy"


def test_config_defaults(client):
    """Test de la configuración por defecto"""
    data = client.get("/api/v1/config/defaults").json()["data"]
    assert "filter.k = 12" in data["text"]
    assert data["sections"]["register"]["radius"] == 3.5
    assert "ss_icp" in data["variants"]


def test_error_catalog(client):
    """Test del catálogo de errores"""
    errors = client.get("/api/v1/errors/catalog").json()["errors"]
    assert [e["error_id"] for e in errors] == [1, 2, 3, 4, 5, 6]


def test_evaluate_identical(client):
    """Test de evaluación con estimación igual a la referencia"""
    body = _tum(_line())
    response = client.post("/api/v1/evaluate", params={"segments": "5,10"},
                           files={"est": ("est.tum", body), "gt": ("gt.tum", body)})
    assert response.status_code == 200
    result = response.json()
    assert result["ate_m"] == pytest.approx(0.0, abs=1e-9)
    assert result["translation_percent"] == pytest.approx(0.0, abs=1e-9)
    assert result["associated_poses"] == 41


def test_evaluate_short_without_segments(client):
    """Test de evaluación corta: KITTI omitido"""
    body = _tum(_line(n=5))
    result = client.post("/api/v1/evaluate", files={"est": ("est.tum", body), "gt": ("gt.tum", body)}).json()
    assert result["translation_percent"] is None
    assert result["rpe_cm"] == pytest.approx(0.0, abs=1e-9)


def test_evaluate_malformed(client):
    """Test de evaluación con un archivo TUM mal formado"""
    response = client.post("/api/v1/evaluate", files={"est": ("est.tum", b"1 2 3\n"), "gt": ("gt.tum", b"1 2 3\n")})
    assert response.status_code == 400
    assert response.json()["detail"]["error_id"] == 5


def test_odometry_on_uploaded_sweeps(client, box_world, quiet_sim_config):
    """Test de odometría sobre barridos subidos en desorden"""
    sweeps = [render_sweep(box_world, static_pose(), 0.125 + 0.25 * i, quiet_sim_config, i) for i in range(3)]
    files = [("files", (f"{i:06d}.rps", encode_sweep(s))) for i, s in reversed(list(enumerate(sweeps)))]
    response = client.post("/api/v1/odometry", files=files)
    assert response.status_code == 200
    result = response.json()
    assert result["sweep_count"] == 3
    assert result["keyframe_count"] == 1
    assert len(result["trajectory_tum"].splitlines()) == 3
    assert result["sweeps"][0]["icp_fitness"] is None


def test_odometry_invalid_sweep(client):
    """Test de odometría con un archivo que no es RPS1"""
    response = client.post("/api/v1/odometry", files=[("files", ("000000.rps", b"not a sweep"))])
    assert response.status_code == 400
    assert response.json()["detail"]["error_id"] == 1


def test_odometry_unknown_variant(client):
    """Test de variante desconocida"""
    body = encode_sweep(PolarSweep(np.zeros((4, 8)), 0.1, 0.125, 0.25))
    response = client.post("/api/v1/odometry", params={"variant": "nope"}, files=[("files", ("a.rps", body))])
    assert response.status_code == 400
