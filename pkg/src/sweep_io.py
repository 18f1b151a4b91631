"""
Modelo de datos del barrido polar y formato portable RPS1

Formato: "RPS1\\n", una línea ASCII `N_a N_r gamma delta_T center_time\\n`
y N_a*N_r intensidades uint8 en orden fila-mayor (acimut, luego rango).
"""

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import List, Union

import numpy as np

from .errors import SweepFormatError
from .geometry import Pose2D, Velocity2D  # noqa: F401  (tipos del modelo de datos)

logger = logging.getLogger(__name__)

MAGIC = b"RPS1\n"
SWEEP_SUFFIX = ".rps"

PathLike = Union[str, Path]


@dataclass(frozen=True, eq=False)
class PolarSweep:
    """Barrido radar polar: N_a acimuts x N_r bins de rango"""

    intensities: np.ndarray
    range_resolution_m: float
    sweep_center_time_s: float
    sweep_duration_s: float

    def __post_init__(self):
        intensities = np.array(self.intensities, dtype=float)
        if intensities.ndim != 2 or intensities.shape[0] < 1 or intensities.shape[1] < 1:
            raise SweepFormatError(f"intensities must be a non-empty N_a x N_r matrix, got shape {intensities.shape}")
        if not np.all(np.isfinite(intensities)) or np.any(intensities < 0):
            raise SweepFormatError("intensities must be finite and non-negative")
        if not self.range_resolution_m > 0:
            raise SweepFormatError(f"non-positive range resolution: {self.range_resolution_m}")
        if not self.sweep_duration_s > 0:
            raise SweepFormatError(f"non-positive sweep duration: {self.sweep_duration_s}")
        if not math.isfinite(self.sweep_center_time_s):
            raise SweepFormatError("sweep center time must be finite")

        intensities.setflags(write=False)
        object.__setattr__(self, "intensities", intensities)
        object.__setattr__(self, "range_resolution_m", float(self.range_resolution_m))
        object.__setattr__(self, "sweep_center_time_s", float(self.sweep_center_time_s))
        object.__setattr__(self, "sweep_duration_s", float(self.sweep_duration_s))

    @property
    def azimuth_count(self) -> int:
        return self.intensities.shape[0]

    @property
    def range_bin_count(self) -> int:
        return self.intensities.shape[1]

    @property
    def max_range_m(self) -> float:
        return self.range_bin_count * self.range_resolution_m

    def __eq__(self, other) -> bool:
        if not isinstance(other, PolarSweep):
            return NotImplemented
        return (
            self.range_resolution_m == other.range_resolution_m
            and self.sweep_center_time_s == other.sweep_center_time_s
            and self.sweep_duration_s == other.sweep_duration_s
            and np.array_equal(self.intensities, other.intensities)
        )


def _header_line(sweep: PolarSweep) -> bytes:
    # repr() de float es la representación decimal más corta que reproduce el valor exacto
    return (
        f"{sweep.azimuth_count} {sweep.range_bin_count} {sweep.range_resolution_m!r} "
        f"{sweep.sweep_duration_s!r} {sweep.sweep_center_time_s!r}\n"
    ).encode("ascii")


def encode_sweep(sweep: PolarSweep) -> bytes:
    """Serializa un barrido al formato RPS1"""
    quantized = np.clip(np.rint(sweep.intensities), 0, 255)
    if not np.array_equal(quantized, sweep.intensities):
        logger.warning("Intensidades cuantizadas a 8 bits al guardar (valores no enteros o > 255)")
    return MAGIC + _header_line(sweep) + quantized.astype(np.uint8).tobytes(order="C")


def decode_sweep(data: bytes) -> PolarSweep:
    """
    Decodifica un barrido RPS1 desde bytes

    Args:
        data: Contenido completo del archivo

    Returns:
        PolarSweep: Barrido validado
    """
    if not data.startswith(MAGIC):
        raise SweepFormatError("bad magic: expected RPS1 header")

    header_end = data.find(b"\n", len(MAGIC))
    if header_end < 0:
        raise SweepFormatError("malformed header: missing line terminator")

    fields = data[len(MAGIC):header_end].decode("ascii", errors="replace").split()
    if len(fields) != 5:
        raise SweepFormatError(f"malformed header: expected 5 fields, got {len(fields)}")

    try:
        n_a, n_r = int(fields[0]), int(fields[1])
        gamma, delta_t, center_time = (float(v) for v in fields[2:])
    except ValueError as e:
        raise SweepFormatError(f"malformed header: {e}") from e

    if n_a < 1 or n_r < 1:
        raise SweepFormatError(f"dimension mismatch: invalid dimensions {n_a}x{n_r}")
    if not gamma > 0:
        raise SweepFormatError(f"non-positive range resolution: {gamma}")
    if not delta_t > 0:
        raise SweepFormatError(f"non-positive sweep duration: {delta_t}")

    payload = data[header_end + 1:]
    if len(payload) != n_a * n_r:
        raise SweepFormatError(f"payload size mismatch: expected {n_a * n_r} bytes, got {len(payload)}")

    intensities = np.frombuffer(payload, dtype=np.uint8).reshape(n_a, n_r).astype(float)
    return PolarSweep(
        intensities=intensities,
        range_resolution_m=gamma,
        sweep_center_time_s=center_time,
        sweep_duration_s=delta_t,
    )


def load_sweep(path: PathLike) -> PolarSweep:
    """Carga y valida un archivo .rps"""
    path = Path(path)
    if not path.is_file():
        raise SweepFormatError(f"sweep file not found: {path}")
    return decode_sweep(path.read_bytes())


def save_sweep(sweep: PolarSweep, path: PathLike) -> None:
    """Guarda un barrido en formato RPS1"""
    path = Path(path)
    try:
        path.write_bytes(encode_sweep(sweep))
    except OSError as e:
        raise SweepFormatError(f"cannot write sweep file {path}: {e}") from e


def list_sweeps(directory: PathLike) -> List[Path]:
    """Archivos .rps de un directorio, en orden lexicográfico"""
    directory = Path(directory)
    if not directory.is_dir():
        raise SweepFormatError(f"not a directory: {directory}")
    return sorted(p for p in directory.iterdir() if p.suffix == SWEEP_SUFFIX and p.is_file())
