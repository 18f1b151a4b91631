"""
Tests para la orquestación de odometría y la ventana de keyframes
"""

import csv
import math

import numpy as np
import pytest

from src.evaluation import ate
from src.geometry import Pose2D
from src.odometry import (
    DIAGNOSTICS_COLUMNS,
    Keyframe,
    KeyframeWindow,
    OdometryConfig,
    RadarOdometry,
    should_create_keyframe,
    write_diagnostics_csv,
)
from src.simulator import World, render_sweep, static_pose, straight_line_trajectory, sweep_center_times
from src.surface import SurfacePointSet
from src.sweep_io import PolarSweep


def _segment_world(rng, spacing=8.0, extent=24.0, length=1.5):
    """Tramos cortos de pared con orientación aleatoria, lejos del recorrido"""
    landmarks = []
    ticks = np.arange(-extent, extent + 1e-9, spacing)
    for cx in ticks:
        for cy in ticks:
            center = np.array([cx, cy]) + rng.uniform(-1.0, 1.0, 2)
            if -2.0 < center[0] < 8.0 and abs(center[1]) < 3.0:
                continue
            angle = rng.uniform(0, math.pi)
            direction = np.array([math.cos(angle), math.sin(angle)])
            for s in np.linspace(-length / 2, length / 2, 7):
                x, y = center + s * direction
                landmarks.append([x, y, 200.0])
    return World(np.array(landmarks))


def _render(world, trajectory, cfg):
    return [render_sweep(world, trajectory.pose_at, float(t), cfg, i)
            for i, t in enumerate(sweep_center_times(trajectory, cfg))]


@pytest.mark.parametrize("pose,expected", [
    (Pose2D(0.0, 0.0, 0.0), False),
    (Pose2D(2.0, 0.0, 0.0), True),
    (Pose2D(0.1, 0.0, math.radians(10)), True),
    (Pose2D(1.0, 1.0, 0.0), False),
])
def test_should_create_keyframe(pose, expected):
    """Test de los umbrales de traslación y rotación"""
    assert should_create_keyframe(Pose2D(), pose, OdometryConfig()) is expected


def test_keyframe_threshold_uses_relative_pose():
    """Test de umbral medido en el marco del último keyframe"""
    last = Pose2D(10.0, 5.0, math.pi / 2)
    assert not should_create_keyframe(last, last.compose(Pose2D(1.0, 0.0, 0.0)), OdometryConfig())


def test_window_evicts_oldest():
    """Test de expulsión del keyframe más antiguo"""
    window = KeyframeWindow(2)
    for t in (1.0, 2.0, 3.0):
        window.push(Keyframe(SurfacePointSet.empty(1.0), Pose2D(t, 0.0, 0.0), t))
    assert len(window) == 2
    assert [kf.timestamp_s for kf in window] == [2.0, 3.0]


def test_window_rejects_old_timestamps():
    """Test de marcas de tiempo no crecientes en la ventana"""
    window = KeyframeWindow(4)
    window.push(Keyframe(SurfacePointSet.empty(1.0), Pose2D(), 1.0))
    with pytest.raises(ValueError):
        window.push(Keyframe(SurfacePointSet.empty(1.0), Pose2D(), 1.0))


def test_first_sweep_is_identity(box_world, quiet_sim_config):
    """Test del primer barrido"""
    odometry = RadarOdometry()
    pose, diagnostics = odometry.process(render_sweep(box_world, static_pose(), 0.125, quiet_sim_config))
    assert pose == Pose2D.identity()
    assert diagnostics.keyframe_created
    assert len(odometry.state.window) == 1
    assert odometry.state.velocity.is_zero()


def test_stationary_robot(box_world, quiet_sim_config):
    """Test de robot detenido: un único keyframe y poses en el origen"""
    sweeps = [render_sweep(box_world, static_pose(), 0.125 + 0.25 * i, quiet_sim_config, i) for i in range(8)]
    run = RadarOdometry().run(sweeps)
    assert run.keyframe_count == 1
    assert np.all(np.linalg.norm(run.trajectory.positions, axis=1) < 1e-3)
    assert run.fallback_count == 0


def test_sweeps_out_of_order_rejected(box_world, quiet_sim_config):
    """Test de barridos con tiempo no creciente"""
    sweep = render_sweep(box_world, static_pose(), 0.125, quiet_sim_config)
    odometry = RadarOdometry()
    odometry.process(sweep)
    with pytest.raises(ValueError, match="strictly increasing"):
        odometry.process(sweep)


def test_empty_sweeps_fall_back():
    """Test de barridos sin retornos: fallback a velocidad constante"""
    sweeps = [PolarSweep(np.zeros((16, 32)), 0.5, 0.125 + 0.25 * i, 0.25) for i in range(4)]
    run = RadarOdometry().run(sweeps)
    assert [d.fallback for d in run.diagnostics] == [False, True, True, True]
    assert run.fallback_ratio == pytest.approx(0.75)
    assert len(run.trajectory) == 4


def test_straight_motion_tracks_ground_truth(rng, quiet_sim_config):
    """Test de avance en línea recta a 1 m/s contra la trayectoria simulada"""
    world = _segment_world(rng)
    gt = straight_line_trajectory(speed_mps=1.0, duration_s=5.0)
    sweeps = _render(world, gt, quiet_sim_config)

    run = RadarOdometry().run(sweeps)

    assert len(run.trajectory) == len(sweeps)
    assert np.array_equal(run.trajectory.timestamps, [s.sweep_center_time_s for s in sweeps])
    assert ate(run.trajectory, gt) < 0.5
    final = run.trajectory.poses[-1]
    assert final.x == pytest.approx(gt.pose_at(sweeps[-1].sweep_center_time_s).x, abs=0.5)
    assert run.keyframe_count >= 2
    assert len(run.diagnostics) == len(sweeps)


def test_replay_is_deterministic(rng, quiet_sim_config):
    """Test de determinismo al reprocesar la misma secuencia"""
    world = _segment_world(rng)
    sweeps = _render(world, straight_line_trajectory(speed_mps=1.0, duration_s=2.0), quiet_sim_config)
    first = RadarOdometry().run(sweeps).trajectory
    second = RadarOdometry().run(sweeps).trajectory
    assert np.array_equal(first.positions, second.positions)
    assert np.array_equal(first.thetas, second.thetas)


def test_window_never_exceeds_capacity(rng, quiet_sim_config):
    """Test de capacidad de la ventana durante una corrida"""
    world = _segment_world(rng)
    sweeps = _render(world, straight_line_trajectory(speed_mps=4.0, duration_s=4.0), quiet_sim_config)
    odometry = RadarOdometry(OdometryConfig(window_size=2))
    for sweep in sweeps:
        odometry.process(sweep)
        assert len(odometry.state.window) <= 2


def test_diagnostics_csv(tmp_path):
    """Test del CSV de diagnóstico"""
    sweeps = [PolarSweep(np.zeros((8, 16)), 0.5, 0.125 + 0.25 * i, 0.25) for i in range(3)]
    run = RadarOdometry().run(sweeps)
    path = tmp_path / "diagnostics.csv"
    write_diagnostics_csv(run.diagnostics, path)
    with open(path, newline="", encoding="utf-8") as f:
        rows = list(csv.DictReader(f))
    assert list(rows[0].keys()) == DIAGNOSTICS_COLUMNS
    assert [row["fallback"] for row in rows] == ["0", "1", "1"]
    assert rows[0]["keyframe_created"] == "1"
