"""
Script para evaluar por lotes trayectorias TUM contra una misma referencia
"""

import csv
import os
import sys
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List

# Agregar el directorio raíz al path
sys.path.append(str(Path(__file__).parent.parent))

from src.errors import RadarOdometryError
from src.evaluation import evaluate_trajectories, read_tum

COLUMNS = ["file", "translation_percent", "deg_per_100m", "rpe_cm", "ate_m", "associated_poses"]


def evaluate_directory(directory: str, gt_file: str, output_file: str = None) -> List[Dict[str, Any]]:
    """
    Evalúa todos los archivos TUM de un directorio

    Args:
        directory: Ruta al directorio con trayectorias estimadas
        gt_file: Trayectoria de referencia
        output_file: Ruta opcional para guardar resultados en CSV

    Returns:
        Lista de resultados por archivo
    """
    gt = read_tum(gt_file)
    gt_path = Path(gt_file).resolve()
    tum_files = sorted(p for p in Path(directory).glob("**/*.tum") if p.resolve() != gt_path)

    print(f"🔍 Encontradas {len(tum_files)} trayectorias")

    results = []
    for tum_file in tum_files:
        try:
            print(f"\n📄 Evaluando: {tum_file.name}")
            report = evaluate_trajectories(read_tum(tum_file), gt)
            result = {
                "file": str(tum_file),
                "translation_percent": report.translation_percent,
                "deg_per_100m": report.deg_per_100m,
                "rpe_cm": report.rpe_cm,
                "ate_m": report.ate_m,
                "associated_poses": report.associated_poses,
            }
            results.append(result)
            print(f"   ATE {report.ate_m:.3f} m | RPE {report.rpe_cm:.2f} cm")

        except RadarOdometryError as e:
            print(f"❌ Error al evaluar {tum_file.name}: {e}")

    if output_file:
        with open(output_file, "w", newline="", encoding="utf-8") as f:
            writer = csv.DictWriter(f, fieldnames=COLUMNS)
            writer.writeheader()
            for result in results:
                writer.writerow({k: "" if v is None else v for k, v in result.items()})
        print(f"\n💾 Resultados guardados en: {output_file}")

    return results


def main():
    """Función principal"""
    if len(sys.argv) < 3:
        print("Uso: python batch_evaluate.py <directorio> <gt.tum> [salida.csv]")
        sys.exit(1)

    directory = sys.argv[1]
    gt_file = sys.argv[2]
    output_file = sys.argv[3] if len(sys.argv) > 3 else None

    if not os.path.isdir(directory):
        print(f"❌ El directorio {directory} no existe")
        sys.exit(1)

    print(f"🚀 Iniciando evaluación por lotes en: {directory}")
    print(f"⏰ {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}")

    try:
        results = evaluate_directory(directory, gt_file, output_file)
    except RadarOdometryError as e:
        print(f"❌ {e}")
        sys.exit(1)

    print("\n📊 Resumen Final:")
    print(f"📁 Trayectorias evaluadas: {len(results)}")
    if results:
        best = min(results, key=lambda r: r["ate_m"])
        print(f"✅ Menor ATE: {Path(best['file']).name} ({best['ate_m']:.3f} m)")


if __name__ == "__main__":
    main()
