"""
Tests para el formato RPS1
"""

import numpy as np
import pytest

from src.errors import SweepFormatError
from src.sweep_io import MAGIC, PolarSweep, decode_sweep, encode_sweep, list_sweeps, load_sweep, save_sweep


def _sweep(n_a=4, n_r=8, seed=0):
    rng = np.random.default_rng(seed)
    return PolarSweep(rng.integers(0, 256, (n_a, n_r)).astype(float), 0.0438, 12.5, 0.25)


def test_save_and_load_sweep(tmp_path):
    """Test de guardado y carga de un barrido"""
    sweep = _sweep()
    path = tmp_path / "000000.rps"
    save_sweep(sweep, path)
    loaded = load_sweep(path)
    assert loaded == sweep
    assert loaded.intensities.size == 32


def test_all_zero_sweep_is_valid(tmp_path):
    """Test de barrido sin retornos"""
    sweep = PolarSweep(np.zeros((3, 5)), 0.1, 0.0, 0.25)
    save_sweep(sweep, tmp_path / "zero.rps")
    assert load_sweep(tmp_path / "zero.rps") == sweep


def test_encoded_length_navtech_shape():
    """Test de longitud del archivo para un barrido 400 x 3360"""
    sweep = PolarSweep(np.zeros((400, 3360)), 0.0438, 0.0, 0.25)
    header = b"400 3360 0.0438 0.25 0.0\n"
    assert len(encode_sweep(sweep)) == len(MAGIC) + len(header) + 400 * 3360


def test_zero_range_resolution_rejected():
    """Test de resolución de rango no positiva en la cabecera"""
    data = MAGIC + b"4 8 0.0 0.25 0.0\n" + bytes(32)
    with pytest.raises(SweepFormatError, match="non-positive range resolution"):
        decode_sweep(data)


def test_truncated_payload_rejected():
    """Test de carga útil truncada"""
    data = encode_sweep(_sweep())[:-1]
    with pytest.raises(SweepFormatError, match="payload size mismatch"):
        decode_sweep(data)


def test_bad_magic_rejected():
    """Test de firma incorrecta"""
    with pytest.raises(SweepFormatError, match="bad magic"):
        decode_sweep(b"RPS2\n4 8 0.1 0.25 0.0\n" + bytes(32))


def test_missing_file_rejected(tmp_path):
    """Test de archivo inexistente"""
    with pytest.raises(SweepFormatError):
        load_sweep(tmp_path / "missing.rps")


def test_negative_intensities_rejected():
    """Test de intensidades negativas"""
    with pytest.raises(SweepFormatError):
        PolarSweep(-np.ones((2, 2)), 0.1, 0.0, 0.25)


def test_list_sweeps_sorted(tmp_path):
    """Test de listado ordenado de barridos"""
    for name in ("000002.rps", "000000.rps", "000001.rps", "notes.txt"):
        (tmp_path / name).write_bytes(encode_sweep(_sweep()))
    assert [p.name for p in list_sweeps(tmp_path)] == ["000000.rps", "000001.rps", "000002.rps"]
