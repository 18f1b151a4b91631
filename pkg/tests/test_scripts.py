"""
Tests para los scripts por lotes
"""

import csv
import sys
from pathlib import Path

import numpy as np

from scripts import make_loop_scenario
from scripts.batch_evaluate import evaluate_directory
from src.config import load_run_config
from src.evaluation import Trajectory, read_tum, write_tum
from src.geometry import Pose2D
from src.simulator import load_world
from src.surface import SmoothingMode


def _line(offset=0.0, n=21):
    return Trajectory(np.arange(n, dtype=float), [Pose2D(float(i), offset, 0.0) for i in range(n)])


def test_batch_evaluate_directory(tmp_path):
    """Test de evaluación por lotes con la referencia dentro del directorio"""
    write_tum(_line(), tmp_path / "gt.tum")
    write_tum(_line(), tmp_path / "perfect.tum")
    write_tum(_line(offset=0.5), tmp_path / "shifted.tum")
    (tmp_path / "broken.tum").write_text("0 1 2\n", encoding="ascii")
    out = tmp_path / "results.csv"

    results = evaluate_directory(str(tmp_path), str(tmp_path / "gt.tum"), str(out))

    assert [Path(r["file"]).name for r in results] == ["perfect.tum", "shifted.tum"]
    assert all(abs(r["ate_m"]) < 1e-9 for r in results)
    with open(out, newline="", encoding="utf-8") as f:
        rows = list(csv.DictReader(f))
    assert len(rows) == 2
    assert rows[0]["translation_percent"] == ""


def test_make_loop_scenario(tmp_path, monkeypatch):
    """Test del escenario del circuito: mundo, trayectoria y configuración de la corrida"""
    monkeypatch.setattr(sys, "argv", ["make_loop_scenario.py", str(tmp_path), "--duration", "10", "--rate", "20"])

    make_loop_scenario.main()

    world = load_world(tmp_path / "world.csv")
    assert len(world) > 0 and np.all(world.reflectivity == 255.0)
    assert len(read_tum(tmp_path / "traj.tum")) == 201
    config = load_run_config(tmp_path / "run.cfg")
    assert config.filter.z_min == 250.0
    assert config.surface.smoothing == SmoothingMode.SYMMETRIC
    assert config.icp.enabled
