"""Frame-sequence ingestion and the snapshot-matrix data model.

A sequence of K grayscale frames of Ny x Nx pixels becomes a J x K matrix
(J = Nx * Ny) whose column k is frame k flattened row-major, i.e. the
horizontal pixel index varies fastest. Pixel values are mapped to [0, 1]
by dividing by 255. Every operation here is a pure function; the returned
objects are treated as immutable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import DataError
from .kernels import rgb_to_gray

IMAGE_SUFFIXES = {".png"}


@dataclass(frozen=True)
class FrameSequence:
    """Ordered stack of 8-bit grayscale frames, shape (K, Ny, Nx)."""

    frames: np.ndarray
    dt: float
    source_id: str = ""
    class_label: str | None = None

    def __post_init__(self):
        if self.frames.ndim != 3 or self.frames.dtype != np.uint8:
            raise DataError("frames must be a (K, Ny, Nx) uint8 array")
        if self.frames.shape[0] < 2:
            raise DataError("fewer than 2 frames")
        if not self.dt > 0:
            raise DataError(f"dt must be positive, got {self.dt}")

    @property
    def k(self) -> int:
        return self.frames.shape[0]

    @property
    def ny(self) -> int:
        return self.frames.shape[1]

    @property
    def nx(self) -> int:
        return self.frames.shape[2]


@dataclass(frozen=True)
class CropRect:
    """Pixel rectangle to retain: origin (x0, y0), extent width x height."""

    x0: int
    y0: int
    width: int
    height: int

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise DataError("crop rectangle must be at least 1x1")
        if self.x0 < 0 or self.y0 < 0:
            raise DataError("crop origin must be non-negative")


@dataclass(frozen=True)
class SnapshotMatrix:
    """J x K real matrix of flattened frames in [0, 1], plus geometry."""

    data: np.ndarray
    nx: int
    ny: int
    dt: float

    def __post_init__(self):
        j, k = self.data.shape
        if j != self.nx * self.ny or j < 1:
            raise DataError(f"row count {j} does not match nx*ny = {self.nx * self.ny}")
        if k < 2:
            raise DataError("need at least 2 snapshots")
        if not np.all(np.isfinite(self.data)):
            raise DataError("snapshot matrix contains non-finite entries")
        if not self.dt > 0:
            raise DataError(f"dt must be positive, got {self.dt}")

    @property
    def j(self) -> int:
        return self.data.shape[0]

    @property
    def k(self) -> int:
        return self.data.shape[1]


def read_frame(path: Path) -> np.ndarray:
    """Read one PNG as a 2-D uint8 array; color inputs go through fixed luma."""
    try:
        with Image.open(path) as img:
            if img.mode == "L":
                return np.asarray(img, dtype=np.uint8)
            if img.mode != "RGB":
                img = img.convert("RGB")
            return rgb_to_gray(np.asarray(img, dtype=np.float64))
    except (UnidentifiedImageError, OSError) as exc:
        raise DataError(f"unreadable image {path}: {exc}") from exc


def write_frame(path: Path, pixels: np.ndarray) -> None:
    if pixels.dtype != np.uint8 or pixels.ndim != 2:
        raise DataError("frame to write must be a 2-D uint8 array")
    Image.fromarray(pixels, mode="L").save(path, format="PNG")


def load_sequence(path: str | Path, dt: float, source_id: str | None = None,
                  class_label: str | None = None) -> FrameSequence:
    """Load all PNG frames under ``path`` in lexicographic filename order."""
    path = Path(path)
    if not path.is_dir():
        raise DataError(f"not a directory: {path}")
    files = sorted(p for p in path.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)
    if len(files) < 2:
        raise DataError(f"fewer than 2 frames in {path}")
    frames = [read_frame(p) for p in files]
    shapes = {f.shape for f in frames}
    if len(shapes) > 1:
        raise DataError(f"mixed frame dimensions in {path}: {sorted(shapes)}")
    return FrameSequence(
        frames=np.stack(frames),
        dt=dt,
        source_id=source_id if source_id is not None else path.name,
        class_label=class_label,
    )


def crop(seq: FrameSequence, rect: CropRect) -> FrameSequence:
    """Crop every frame to ``rect``. Frame count is unchanged."""
    if rect.x0 + rect.width > seq.nx or rect.y0 + rect.height > seq.ny:
        raise DataError(
            f"crop rect {rect} exceeds frame bounds {seq.nx}x{seq.ny}"
        )
    cropped = seq.frames[:, rect.y0:rect.y0 + rect.height, rect.x0:rect.x0 + rect.width]
    return replace(seq, frames=np.ascontiguousarray(cropped))


def to_snapshot_matrix(seq: FrameSequence) -> SnapshotMatrix:
    """Flatten frames into columns and normalize pixel values to [0, 1]."""
    k = seq.k
    data = seq.frames.reshape(k, seq.nx * seq.ny).T.astype(np.float64) / 255.0
    return SnapshotMatrix(data=data, nx=seq.nx, ny=seq.ny, dt=seq.dt)


def load_crop_sidecar(path: str | Path) -> tuple[CropRect, float | None]:
    """Read a JSON sidecar with keys x0, y0, width, height and optional dt."""
    path = Path(path)
    try:
        payload = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot parse crop sidecar {path}: {exc}") from exc
    try:
        rect = CropRect(
            x0=int(payload["x0"]), y0=int(payload["y0"]),
            width=int(payload["width"]), height=int(payload["height"]),
        )
    except KeyError as exc:
        raise DataError(f"crop sidecar {path} missing key {exc}") from exc
    dt = payload.get("dt")
    return rect, (float(dt) if dt is not None else None)
