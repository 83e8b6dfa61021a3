"""Dataset-tree loading and the independent sample-leak audit.

The trees come from the decomposition toolkit's build-dataset command:
``{root}/{train|validation|test|testing_I}/{class}/{source}_{kind}_{idx}.png``.
This module re-implements the filename bookkeeping on purpose — the leak
audit must not share code with the builder it distrusts.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

SPLITS = ("train", "validation", "test")
TESTING_I = "testing_I"


class DatasetTreeError(Exception):
    """Malformed or leaking dataset tree."""


@dataclass(frozen=True)
class SplitArrays:
    images: np.ndarray    # (N, size, size, 1) float32 in [0, 1]
    labels: np.ndarray    # (N,) int32 class indices
    class_names: tuple[str, ...]
    sources: tuple[str, ...]


def source_of(name: str) -> str:
    stem = name.rsplit(".", 1)[0]
    parts = stem.rsplit("_", 2)
    if len(parts) != 3 or parts[1] not in ("frame", "mode"):
        raise DatasetTreeError(f"unrecognized artifact name {name!r}")
    return parts[0]


def class_names(root: str | Path, split: str = "train") -> tuple[str, ...]:
    split_dir = Path(root) / split
    if not split_dir.is_dir():
        raise DatasetTreeError(f"{root} has no {split} split")
    names = tuple(sorted(p.name for p in split_dir.iterdir() if p.is_dir()))
    if not names:
        raise DatasetTreeError(f"{split_dir} holds no class directories")
    return names


def audit_sample_leak(root: str | Path) -> dict:
    """Abort-worthy check: training-side sources must not reach testing I."""
    root = Path(root)
    train_side: set[str] = set()
    for split in SPLITS:
        for png in (root / split).rglob("*.png"):
            train_side.add(source_of(png.name))
    heldout: set[str] = set()
    testing = root / TESTING_I
    if testing.is_dir():
        for png in testing.rglob("*.png"):
            heldout.add(source_of(png.name))
    overlap = sorted(train_side & heldout)
    if overlap:
        raise DatasetTreeError(f"sample leak into {TESTING_I}: {overlap}")
    return {"training_sources": len(train_side), "testing_sources": len(heldout)}


def load_split(root: str | Path, split: str, input_size: int,
               classes: tuple[str, ...] | None = None) -> SplitArrays:
    """Load one split fully into memory, resized and scaled to [0, 1]."""
    root = Path(root)
    names = classes if classes is not None else class_names(root, split)
    images, labels, sources = [], [], []
    for idx, label in enumerate(names):
        class_dir = root / split / label
        if not class_dir.is_dir():
            raise DatasetTreeError(f"{root} split {split!r} lacks class {label!r}")
        files = sorted(class_dir.glob("*.png"))
        if not files:
            raise DatasetTreeError(f"{class_dir} is empty")
        for path in files:
            with Image.open(path) as img:
                if img.mode != "L":
                    img = img.convert("L")
                if img.size != (input_size, input_size):
                    img = img.resize((input_size, input_size), Image.BILINEAR)
                images.append(np.asarray(img, dtype=np.float32) / 255.0)
            labels.append(idx)
            sources.append(source_of(path.name))
    stacked = np.stack(images)[..., None]
    return SplitArrays(images=stacked, labels=np.asarray(labels, dtype=np.int32),
                       class_names=tuple(names), sources=tuple(sources))
