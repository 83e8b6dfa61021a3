"""Shared fixtures: tiny dataset trees built directly on disk."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image


def write_png(path: Path, pixels: np.ndarray) -> None:
    Image.fromarray(pixels.astype(np.uint8), mode="L").save(path)


def separable_image(rng: np.random.Generator, label_idx: int, size: int = 24) -> np.ndarray:
    """Class 0 lights the left half, class 1 the right half."""
    img = rng.integers(20, 60, size=(size, size))
    half = size // 2
    if label_idx == 0:
        img[:, :half] += 150
    else:
        img[:, half:] += 150
    return np.clip(img, 0, 255)


def build_toy_tree(root: Path, n_train: int = 40, n_val: int = 16,
                   size: int = 24, seed: int = 0) -> Path:
    """Linearly separable 2-class tree with train/validation/test splits."""
    rng = np.random.default_rng(seed)
    counts = {"train": n_train, "validation": n_val, "test": n_val}
    for split, count in counts.items():
        for idx, label in enumerate(("left", "right")):
            d = root / split / label
            d.mkdir(parents=True, exist_ok=True)
            for k in range(count):
                sid = f"{label}{k % 4:02d}"
                write_png(d / f"{sid}_frame_{split_offset(split) + k:04d}.png",
                          separable_image(rng, idx, size))
    return root


def split_offset(split: str) -> int:
    # keep frame indices distinct across splits so file names never collide
    return {"train": 0, "validation": 1000, "test": 2000}[split]


def add_testing_split(root: Path, size: int = 24, count: int = 8, seed: int = 9) -> None:
    rng = np.random.default_rng(seed)
    for idx, label in enumerate(("left", "right")):
        d = root / "testing_I" / label
        d.mkdir(parents=True, exist_ok=True)
        for k in range(count):
            sid = f"{label}_held{k % 2:02d}"
            write_png(d / f"{sid}_frame_{k:04d}.png", separable_image(rng, idx, size))
