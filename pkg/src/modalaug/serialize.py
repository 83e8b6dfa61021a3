"""On-disk formats: float-frame sidecars, mode sidecars, spectrum CSV.

The binary sidecar is a little-endian header (magic, version, payload
kind, nx, ny, count, dt) followed by raw float64 or complex128 data.
Float frames carry the un-quantized pixel fields the 8-bit PNGs cannot;
mode sidecars carry the complex spatial modes of a spectrum. The CSV is
the human-readable half of a saved spectrum.
"""

from __future__ import annotations

import csv
import struct
from pathlib import Path

import numpy as np

from .errors import DataError
from .hodmd import DmdSpectrum

MAGIC = b"MODALAUG"
VERSION = 1
KIND_FLOAT_FRAMES = 0
KIND_COMPLEX_MODES = 1
_HEADER = struct.Struct("<8sIIIIId")

SPECTRUM_CSV = "spectrum.csv"
MODES_BIN = "modes.bin"


def _write_sidecar(path: Path, kind: int, nx: int, ny: int, count: int,
                   dt: float, payload: np.ndarray) -> None:
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, kind, nx, ny, count, dt))
        fh.write(np.ascontiguousarray(payload).tobytes())


def _read_sidecar(path: Path, expected_kind: int) -> tuple[np.ndarray, int, int, int, float]:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise DataError(f"sidecar {path} is truncated")
    magic, version, kind, nx, ny, count, dt = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise DataError(f"sidecar {path} has wrong magic {magic!r}")
    if version != VERSION:
        raise DataError(f"sidecar {path} has unsupported version {version}")
    if kind != expected_kind:
        raise DataError(f"sidecar {path} holds kind {kind}, expected {expected_kind}")
    dtype = np.float64 if kind == KIND_FLOAT_FRAMES else np.complex128
    data = np.frombuffer(raw, dtype=dtype, offset=_HEADER.size)
    return data, nx, ny, count, dt


def write_float_frames(path: str | Path, frames: np.ndarray, dt: float) -> None:
    """Frames are (K, Ny, Nx) float64."""
    k, ny, nx = frames.shape
    _write_sidecar(Path(path), KIND_FLOAT_FRAMES, nx, ny, k, dt,
                   frames.astype(np.float64, copy=False))


def read_float_frames(path: str | Path) -> tuple[np.ndarray, float]:
    data, nx, ny, k, dt = _read_sidecar(Path(path), KIND_FLOAT_FRAMES)
    if data.size != k * ny * nx:
        raise DataError(f"sidecar {path} payload size mismatch")
    return data.reshape(k, ny, nx).copy(), dt


def write_modes(path: str | Path, modes: np.ndarray, nx: int, ny: int, dt: float) -> None:
    """Modes are (J, M) complex128 with J = nx * ny."""
    j, m = modes.shape
    if j != nx * ny:
        raise DataError(f"mode length {j} does not match {nx}x{ny}")
    _write_sidecar(Path(path), KIND_COMPLEX_MODES, nx, ny, m, dt,
                   modes.astype(np.complex128, copy=False))


def read_modes(path: str | Path) -> tuple[np.ndarray, int, int, float]:
    data, nx, ny, m, dt = _read_sidecar(Path(path), KIND_COMPLEX_MODES)
    j = nx * ny
    if data.size != j * m:
        raise DataError(f"sidecar {path} payload size mismatch")
    return data.reshape(j, m).copy(), nx, ny, dt


def save_spectrum(out_dir: str | Path, spectrum: DmdSpectrum, nx: int, ny: int) -> None:
    """Write spectrum.csv (one row per mode) and modes.bin under out_dir."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / SPECTRUM_CSV, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "delta", "omega", "amp_abs", "amp_real", "amp_imag"])
        for i in range(spectrum.m_retained):
            a = spectrum.amplitudes[i]
            writer.writerow([
                i,
                f"{spectrum.growth_rates[i]:.17g}",
                f"{spectrum.frequencies[i]:.17g}",
                f"{abs(a):.17g}",
                f"{a.real:.17g}",
                f"{a.imag:.17g}",
            ])
    write_modes(out_dir / MODES_BIN, spectrum.modes, nx, ny, spectrum.dt)


def load_spectrum(in_dir: str | Path) -> tuple[DmdSpectrum, int, int]:
    """Inverse of save_spectrum. Returns (spectrum, nx, ny)."""
    in_dir = Path(in_dir)
    modes, nx, ny, dt = read_modes(in_dir / MODES_BIN)
    deltas, omegas, amps = [], [], []
    try:
        with open(in_dir / SPECTRUM_CSV, newline="") as fh:
            for row in csv.DictReader(fh):
                deltas.append(float(row["delta"]))
                omegas.append(float(row["omega"]))
                amps.append(complex(float(row["amp_real"]), float(row["amp_imag"])))
    except OSError as exc:
        raise DataError(f"cannot read spectrum table in {in_dir}: {exc}") from exc
    if len(amps) != modes.shape[1]:
        raise DataError(f"{in_dir}: CSV rows disagree with mode sidecar")
    spectrum = DmdSpectrum(
        modes=modes,
        amplitudes=np.asarray(amps, dtype=np.complex128),
        growth_rates=np.asarray(deltas),
        frequencies=np.asarray(omegas),
        dt=dt,
    )
    return spectrum, nx, ny
