"""
Interfaz de línea de comandos: run, eval, simulate, dump-config, benchmark
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from tqdm import tqdm

from .config import RunConfig, configure_logging, dump_config, load_run_config, settings
from .errors import RadarOdometryError, SweepFormatError
from .evaluation import evaluate_trajectories, read_tum, write_metrics_csv, write_segments_csv, write_tum
from .odometry import RadarOdometry, write_diagnostics_csv
from .simulator import generate_sequence, load_world, rectangular_loop_trajectory, rectangular_loop_world
from .sweep_io import list_sweeps, load_sweep
from .variants import VARIANTS, apply_variant, benchmark, write_benchmark_csv

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FALLBACK = 2
MAX_FALLBACK_RATIO = 0.5

TRAJECTORY_FILE = "trajectory.tum"
DIAGNOSTICS_FILE = "diagnostics.csv"


def _load_config(args: argparse.Namespace) -> RunConfig:
    return load_run_config(args.config, args.set or ())


def _sweep_paths(input_dir: Path) -> List[Path]:
    paths = list_sweeps(input_dir)
    if not paths:
        raise SweepFormatError(f"no sweeps found in {input_dir}")
    return paths


def cmd_run(args: argparse.Namespace) -> int:
    """Odometría sobre todos los barridos de un directorio"""
    config = _load_config(args)
    if args.variant:
        config = apply_variant(config, args.variant)
    logger.debug("Configuración efectiva:\n%s", dump_config(config))
    paths = _sweep_paths(Path(args.input_dir))

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    print(f"🚀 Procesando {len(paths)} barridos de {args.input_dir}")

    odometry = RadarOdometry(config.to_odometry_config())
    sweeps = (load_sweep(p) for p in tqdm(paths, desc="Odometría", unit="barrido",
                                          disable=not settings.SHOW_PROGRESS))
    run = odometry.run(sweeps)

    write_tum(run.trajectory, out_dir / TRAJECTORY_FILE)
    write_diagnostics_csv(run.diagnostics, out_dir / DIAGNOSTICS_FILE)
    print(f"💾 Trayectoria: {out_dir / TRAJECTORY_FILE}")
    print(f"📊 {run.keyframe_count} keyframes, {run.fallback_count} fallbacks de registro")

    if run.fallback_ratio > MAX_FALLBACK_RATIO:
        print(f"❌ {run.fallback_ratio:.0%} de los barridos usaron la predicción de velocidad constante",
              file=sys.stderr)
        return EXIT_FALLBACK
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    """Métricas de una trayectoria estimada frente a la referencia"""
    config = _load_config(args)
    segments = config.eval.segments
    if args.segments:
        segments = [float(v) for v in args.segments.split(",") if v.strip()]

    report = evaluate_trajectories(read_tum(args.est), read_tum(args.gt), segments,
                                   config.eval.rpe_delta, config.eval.tolerance,
                                   require_kitti=bool(args.segments))

    for name, value, unit in report.rows():
        print(f"{name:>18}: {value:.6g} {unit}")
    if args.out:
        write_metrics_csv(report, args.out)
        print(f"💾 Métricas: {args.out}")
    if args.segments_out and report.segments:
        write_segments_csv(report.segments, args.segments_out)
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    """Genera una secuencia sintética; sin --world/--traj usa el circuito rectangular"""
    config = _load_config(args)
    sim_config = config.to_sim_config()

    world = load_world(args.world) if args.world else rectangular_loop_world(dense_factor=args.dense_factor)
    if args.traj:
        trajectory = read_tum(args.traj)
    else:
        duration = args.sweeps * sim_config.sweep_duration_s
        trajectory = rectangular_loop_trajectory(duration_s=duration)

    written = generate_sequence(world, trajectory, sim_config, args.out, progress=settings.SHOW_PROGRESS)
    print(f"✅ {len(written)} barridos escritos en {args.out}")
    return EXIT_OK


def cmd_dump_config(args: argparse.Namespace) -> int:
    print(dump_config(_load_config(args)), end="")
    return EXIT_OK


def cmd_benchmark(args: argparse.Namespace) -> int:
    """Compara las variantes del pipeline sobre una secuencia"""
    config = _load_config(args)
    names = [v.strip() for v in args.variants.split(",")] if args.variants else list(VARIANTS)
    unknown = [v for v in names if v not in VARIANTS]
    if unknown:
        raise RadarOdometryError(f"unknown variants: {', '.join(unknown)}")

    rows = benchmark(_sweep_paths(Path(args.input_dir)), read_tum(args.gt), config, names,
                     progress=settings.SHOW_PROGRESS)
    write_benchmark_csv(rows, args.out)
    for row in rows:
        print(f"📈 {row.variant:>12}: ATE {row.ate_m:.3f} m, RPE {row.rpe_cm:.2f} cm, "
              f"{row.fallback_count} fallbacks, {row.runtime_s:.1f} s")
    print(f"💾 Comparación: {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="archivo de configuración 'seccion.clave = valor'")
    common.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE",
                        help="override de configuración (repetible)")
    common.add_argument("--log-level", default=None, help="nivel de logging (por defecto LOG_LEVEL)")

    parser = argparse.ArgumentParser(prog="radar-odometry", description="Odometría por radar giratorio 2D")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", parents=[common], help="estimar la trayectoria de una secuencia")
    run.add_argument("input_dir", help="directorio con archivos .rps")
    run.add_argument("--out", default=".", help="directorio de salida")
    run.add_argument("--variant", choices=sorted(VARIANTS), help="aplicar una variante predefinida")
    run.set_defaults(handler=cmd_run)

    ev = sub.add_parser("eval", parents=[common], help="evaluar una trayectoria contra la referencia")
    ev.add_argument("--est", required=True, help="trayectoria estimada (TUM)")
    ev.add_argument("--gt", required=True, help="trayectoria de referencia (TUM)")
    ev.add_argument("--out", help="CSV de métricas")
    ev.add_argument("--segments", help="longitudes de segmento KITTI separadas por comas")
    ev.add_argument("--segments-out", help="CSV de errores por segmento")
    ev.set_defaults(handler=cmd_eval)

    sim = sub.add_parser("simulate", parents=[common], help="generar una secuencia sintética")
    sim.add_argument("--world", help="CSV x,y,reflectivity")
    sim.add_argument("--traj", help="trayectoria de referencia densa (TUM)")
    sim.add_argument("--out", required=True, help="directorio de salida")
    sim.add_argument("--sweeps", type=int, default=400, help="barridos del circuito por defecto")
    sim.add_argument("--dense-factor", type=int, default=1, help="densidad extra de un lado del circuito")
    sim.set_defaults(handler=cmd_simulate)

    dump = sub.add_parser("dump-config", parents=[common], help="mostrar la configuración efectiva")
    dump.set_defaults(handler=cmd_dump_config)

    bench = sub.add_parser("benchmark", parents=[common], help="comparar variantes del pipeline")
    bench.add_argument("input_dir", help="directorio con archivos .rps")
    bench.add_argument("--gt", required=True, help="trayectoria de referencia (TUM)")
    bench.add_argument("--out", default="benchmark.csv", help="CSV de comparación")
    bench.add_argument("--variants", help="variantes separadas por comas (por defecto todas)")
    bench.set_defaults(handler=cmd_benchmark)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    try:
        return args.handler(args)
    except (RadarOdometryError, ValueError, OSError) as e:
        print(f"❌ Error: {e}", file=sys.stderr)
        return EXIT_ERROR
