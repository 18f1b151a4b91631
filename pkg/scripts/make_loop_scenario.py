"""
Script para generar el escenario del circuito rectangular: mundo CSV y
trayectoria de referencia densa en TUM
"""

import argparse
import sys
from pathlib import Path

# Agregar el directorio raíz al path
sys.path.append(str(Path(__file__).parent.parent))

from src.evaluation import write_tum
from src.simulator import rectangular_loop_trajectory, rectangular_loop_world, save_world

# Los paneles saturan a 255: con este umbral casi todo el speckle queda fuera
LOOP_CONFIG = """filter.z_min = 250
surface.smoothing = symmetric
icp.enabled = true
"""


def main():
    """Función principal"""
    parser = argparse.ArgumentParser(description="Genera mundo y trayectoria del circuito rectangular")
    parser.add_argument("out_dir", help="directorio de salida")
    parser.add_argument("--width", type=float, default=60.0, help="ancho del recorrido (m)")
    parser.add_argument("--height", type=float, default=40.0, help="alto del recorrido (m)")
    parser.add_argument("--corner-radius", type=float, default=5.0, help="radio de las esquinas (m)")
    parser.add_argument("--corridor", type=float, default=4.0, help="distancia de la trayectoria a las paredes (m)")
    parser.add_argument("--landmark-spacing", type=float, default=0.02, help="separación entre landmarks de un panel (m)")
    parser.add_argument("--duration", type=float, default=100.0, help="duración de la vuelta (s)")
    parser.add_argument("--rate", type=float, default=100.0, help="frecuencia de la trayectoria (Hz)")
    parser.add_argument("--dense-factor", type=int, default=1, help="densidad extra del lado sur")
    parser.add_argument("--seed", type=int, default=0, help="semilla de los paneles")
    args = parser.parse_args()

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    print(f"🚀 Generando circuito {args.width} x {args.height} m en: {out_dir}")
    world = rectangular_loop_world(args.width, args.height, args.corridor, args.landmark_spacing,
                                   dense_factor=args.dense_factor, seed=args.seed)
    trajectory = rectangular_loop_trajectory(args.width, args.height, args.corner_radius,
                                             duration_s=args.duration, rate_hz=args.rate)

    save_world(world, out_dir / "world.csv")
    write_tum(trajectory, out_dir / "traj.tum")
    (out_dir / "run.cfg").write_text(LOOP_CONFIG, encoding="utf-8")

    print("\n📊 Resumen:")
    print(f"📍 Landmarks: {len(world)}")
    print(f"🛣️ Longitud de la vuelta: {trajectory.path_lengths()[-1]:.1f} m")
    print(f"⏱️ Poses de referencia: {len(trajectory)}")
    print(f"\n💾 Escenario guardado en: {out_dir}")
    print(f"✅ Siguiente paso: python -m src simulate --world {out_dir / 'world.csv'} "
          f"--traj {out_dir / 'traj.tum'} --out {out_dir / 'sweeps'}")
    print(f"✅ Después: python -m src run {out_dir / 'sweeps'} --config {out_dir / 'run.cfg'} "
          f"--out {out_dir / 'out'}")


if __name__ == "__main__":
    main()
