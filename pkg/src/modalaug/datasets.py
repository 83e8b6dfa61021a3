"""Assemble classification corpora with strict sample-level separation.

From a corpus tree (class/sample/frame_*.png) this builds:

* dataset 01 — successive frames of the per-class training pool, split
  into train/validation/test at the fixed 14:5:1 proportions;
* testing I — successive frames of the held-out samples, original frames
  only, shared by both testcases;
* dataset 02 — dataset 01 plus rendered mode images (one tenth of each
  split), every mode image traced back to a training-pool sample.

Counts are parametric in a scale factor; at integer scales the reference
proportions hold exactly. Sample partitions and frame shuffles are
seeded, per-class, and independent of which other classes are present.
"""

from __future__ import annotations

import hashlib
import json
import shutil
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError

SPLITS = ("train", "validation", "test")
TESTING_I = "testing_I"
MANIFEST_NAME = "dataset_manifest.json"

BASE_FRAMES_TRAIN = 100   # successive frames per training sample at scale 1
BASE_FRAMES_HELDOUT = 90  # successive frames per held-out sample at scale 1
BASE_MODES = 10           # mode images per training sample at scale 1


def _scaled(base: int, scale: float) -> int:
    return max(1, int(np.floor(base * scale + 0.5)))


@dataclass(frozen=True)
class DatasetLayout:
    """Per-class accounting; all classes get identical counts."""

    classes: tuple[str, ...]
    scale: float = 1.0
    train_samples: int = 20
    heldout_samples: int = 6
    random_frame_offset: bool = False

    def __post_init__(self):
        if len(self.classes) < 1:
            raise DataError("layout needs at least one class")
        if len(set(self.classes)) != len(self.classes):
            raise DataError("duplicate class labels")
        if self.scale <= 0:
            raise DataError("scale must be positive")
        if self.train_samples < 1 or self.heldout_samples < 1:
            raise DataError("sample counts must be >= 1")

    @property
    def frames_per_training_sample(self) -> int:
        return _scaled(BASE_FRAMES_TRAIN, self.scale)

    @property
    def frames_per_heldout_sample(self) -> int:
        return _scaled(BASE_FRAMES_HELDOUT, self.scale)

    @property
    def modes_per_sample(self) -> int:
        return _scaled(BASE_MODES, self.scale)

    def _split_pool(self, pool: int) -> dict[str, int]:
        test = pool // 20
        validation = pool // 4
        return {"train": pool - validation - test, "validation": validation, "test": test}

    def frame_counts(self) -> dict[str, int]:
        """Original-frame images per class per split."""
        return self._split_pool(self.train_samples * self.frames_per_training_sample)

    def mode_counts(self) -> dict[str, int]:
        """Mode images per class per split (dataset 02 additions)."""
        return self._split_pool(self.train_samples * self.modes_per_sample)

    def testing_i_count(self) -> int:
        return self.heldout_samples * self.frames_per_heldout_sample


def _class_rng(seed: int, label: str, stream: int) -> np.random.Generator:
    digest = int.from_bytes(hashlib.sha256(label.encode()).digest()[:8], "little")
    return np.random.default_rng(np.random.SeedSequence([seed, digest, stream]))


def partition_samples(corpus_dir: str | Path, layout: DatasetLayout,
                      seed: int) -> dict[str, dict[str, list[str]]]:
    """Seeded per-class split of samples into training pool and held-out.

    The split depends only on (seed, class label, sample names), never on
    which other classes are being built.
    """
    corpus_dir = Path(corpus_dir)
    partition: dict[str, dict[str, list[str]]] = {}
    for label in layout.classes:
        class_dir = corpus_dir / label
        if not class_dir.is_dir():
            raise DataError(f"corpus has no class directory {label!r}")
        samples = sorted(p.name for p in class_dir.iterdir() if p.is_dir())
        needed = layout.train_samples + layout.heldout_samples
        if len(samples) < needed:
            raise DataError(
                f"class {label!r} has {len(samples)} samples, needs {needed}"
            )
        order = list(samples)
        _class_rng(seed, label, 0).shuffle(order)
        partition[label] = {
            "training_pool": sorted(order[:layout.train_samples]),
            "heldout": sorted(order[layout.train_samples:needed]),
        }
    return partition


def _sample_frames(corpus_dir: Path, label: str, sample: str) -> list[Path]:
    frames = sorted((corpus_dir / label / sample).glob("*.png"))
    if not frames:
        raise DataError(f"sample {label}/{sample} has no frames")
    return frames


def _successive(frames: list[Path], count: int, rng: np.random.Generator | None,
                label: str, sample: str) -> tuple[int, list[Path]]:
    """A contiguous window of frames; returns (start offset, paths)."""
    if len(frames) < count:
        raise DataError(
            f"sample {label}/{sample} has {len(frames)} frames, needs {count}"
        )
    offset = int(rng.integers(0, len(frames) - count + 1)) if rng is not None else 0
    return offset, frames[offset:offset + count]


def build_dataset01(corpus_dir: str | Path, layout: DatasetLayout, seed: int,
                    out_dir: str | Path) -> dict:
    """Original-frame dataset: train/validation/test splits plus manifest."""
    corpus_dir, out_dir = Path(corpus_dir), Path(out_dir)
    partition = partition_samples(corpus_dir, layout, seed)
    counts = layout.frame_counts()
    manifest: dict = {
        "kind": "dataset01",
        "seed": seed,
        "scale": layout.scale,
        "frames_per_training_sample": layout.frames_per_training_sample,
        "frames_per_heldout_sample": layout.frames_per_heldout_sample,
        "per_class_counts": counts,
        "classes": {},
    }
    for label in layout.classes:
        offset_rng = _class_rng(seed, label, 1) if layout.random_frame_offset else None
        entries: list[tuple[str, int, Path]] = []
        for sample in partition[label]["training_pool"]:
            offset, frames = _successive(_sample_frames(corpus_dir, label, sample),
                                         layout.frames_per_training_sample, offset_rng,
                                         label, sample)
            entries.extend((sample, offset + k, path) for k, path in enumerate(frames))
        _class_rng(seed, label, 2).shuffle(entries)

        cursor = 0
        placed: dict[str, list[str]] = {}
        for split in SPLITS:
            dest = out_dir / split / label
            dest.mkdir(parents=True, exist_ok=True)
            names = []
            for sample, k, path in entries[cursor:cursor + counts[split]]:
                name = f"{sample}_frame_{k:04d}.png"
                shutil.copyfile(path, dest / name)
                names.append(name)
            placed[split] = names
            cursor += counts[split]
        manifest["classes"][label] = {
            "training_pool": partition[label]["training_pool"],
            "heldout": partition[label]["heldout"],
            "files": placed,
        }
    _write_manifest(out_dir, "dataset", manifest)
    return manifest


def build_testing_I(corpus_dir: str | Path, layout: DatasetLayout, seed: int,
                    out_dir: str | Path) -> dict:
    """Held-out evaluation split: successive original frames only."""
    corpus_dir, out_dir = Path(corpus_dir), Path(out_dir)
    partition = partition_samples(corpus_dir, layout, seed)
    manifest: dict = {
        "kind": "testing_I",
        "seed": seed,
        "scale": layout.scale,
        "per_class_count": layout.testing_i_count(),
        "classes": {},
    }
    for label in layout.classes:
        offset_rng = _class_rng(seed, label, 3) if layout.random_frame_offset else None
        dest = out_dir / TESTING_I / label
        dest.mkdir(parents=True, exist_ok=True)
        names = []
        for sample in partition[label]["heldout"]:
            offset, frames = _successive(_sample_frames(corpus_dir, label, sample),
                                         layout.frames_per_heldout_sample, offset_rng,
                                         label, sample)
            for k, path in enumerate(frames, start=offset):
                name = f"{sample}_frame_{k:04d}.png"
                shutil.copyfile(path, dest / name)
                names.append(name)
        manifest["classes"][label] = {
            "heldout": partition[label]["heldout"],
            "files": names,
        }
    _write_manifest(out_dir, TESTING_I, manifest)
    return manifest


def _collect_mode_manifests(modes_dir: Path) -> dict[str, dict]:
    """Map source_id -> parsed modes.json for every exported sample."""
    found: dict[str, dict] = {}
    for path in sorted(modes_dir.rglob("modes.json")):
        payload = json.loads(path.read_text())
        sid = payload.get("source_id")
        if not sid:
            raise DataError(f"mode manifest {path} lacks a source_id")
        if sid in found:
            raise DataError(f"duplicate mode manifests for source {sid!r}")
        payload["_dir"] = path.parent
        found[sid] = payload
    if not found:
        raise DataError(f"no modes.json manifests under {modes_dir}")
    return found


def build_dataset02(dataset01_dir: str | Path, modes_dir: str | Path,
                    layout: DatasetLayout, seed: int, out_dir: str | Path) -> dict:
    """Dataset 01 plus mode-image augmentation, leak-checked.

    Every mode image must trace to a training-pool sample of its class;
    a mode sourced from a held-out sample aborts the build.
    """
    dataset01_dir, modes_dir, out_dir = Path(dataset01_dir), Path(modes_dir), Path(out_dir)
    base = _read_manifest(dataset01_dir).get("dataset", {})
    if base.get("kind") != "dataset01":
        raise DataError(f"{dataset01_dir} does not hold a dataset01 manifest")

    mode_manifests = _collect_mode_manifests(modes_dir)
    heldout_all = {sid for info in base["classes"].values() for sid in info["heldout"]}
    for sid in mode_manifests:
        if sid in heldout_all:
            raise DataError(f"leak: mode images sourced from held-out sample {sid!r}")

    counts = layout.mode_counts()
    manifest: dict = {
        "kind": "dataset02",
        "seed": seed,
        "scale": layout.scale,
        "modes_per_sample": layout.modes_per_sample,
        "per_class_frame_counts": base["per_class_counts"],
        "per_class_mode_counts": counts,
        "classes": {},
    }
    for label in layout.classes:
        if label not in base["classes"]:
            raise DataError(f"dataset01 has no class {label!r}")
        pool = base["classes"][label]["training_pool"]

        for split in SPLITS:
            dest = out_dir / split / label
            dest.mkdir(parents=True, exist_ok=True)
            for name in base["classes"][label]["files"][split]:
                shutil.copyfile(dataset01_dir / split / label / name, dest / name)

        mode_entries: list[dict] = []
        for sid in pool:
            if sid not in mode_manifests:
                raise DataError(f"no exported modes for training sample {sid!r}")
            payload = mode_manifests[sid]
            ranked = sorted(payload["modes"], key=lambda e: e["rank"])
            if len(ranked) < layout.modes_per_sample:
                raise DataError(
                    f"sample {sid!r} has {len(ranked)} modes, needs {layout.modes_per_sample}"
                )
            for entry in ranked[:layout.modes_per_sample]:
                mode_entries.append({
                    "source_id": sid,
                    "src": payload["_dir"] / entry["file"],
                    "rank": entry["rank"],
                    "delta": entry["delta"],
                    "omega": entry["omega"],
                    "amplitude_abs": entry["amplitude_abs"],
                    "rendering": entry["rendering"],
                    "noise_score": entry["noise_score"],
                    "hodmd_params": payload.get("hodmd_params"),
                })
        _class_rng(seed, label, 4).shuffle(mode_entries)

        cursor = 0
        placed: dict[str, list[dict]] = {}
        for split in SPLITS:
            dest = out_dir / split / label
            records = []
            for entry in mode_entries[cursor:cursor + counts[split]]:
                name = f"{entry['source_id']}_mode_{entry['rank']:04d}.png"
                shutil.copyfile(entry["src"], dest / name)
                records.append({k: v for k, v in entry.items() if k != "src"} | {"file": name})
            placed[split] = records
            cursor += counts[split]
        manifest["classes"][label] = {
            "training_pool": pool,
            "heldout": base["classes"][label]["heldout"],
            "frame_files": base["classes"][label]["files"],
            "mode_files": placed,
        }
    _write_manifest(out_dir, "dataset", manifest)
    return manifest


def _write_manifest(out_dir: Path, section: str, manifest: dict) -> None:
    """Store the section under its key in the shared per-root manifest."""
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / MANIFEST_NAME
    combined = json.loads(path.read_text()) if path.exists() else {}
    combined[section] = manifest
    path.write_text(json.dumps(combined, indent=2, sort_keys=True, default=str))


def _read_manifest(dataset_dir: Path) -> dict:
    path = dataset_dir / MANIFEST_NAME
    if not path.exists():
        raise DataError(f"{dataset_dir} has no {MANIFEST_NAME}")
    return json.loads(path.read_text())


def parse_artifact_name(name: str) -> tuple[str, str, int]:
    """Split '{source_id}_{kind}_{idx}.png' from the right."""
    stem = name.rsplit(".", 1)[0]
    parts = stem.rsplit("_", 2)
    if len(parts) != 3 or parts[1] not in ("frame", "mode"):
        raise DataError(f"unrecognized artifact name {name!r}")
    return parts[0], parts[1], int(parts[2])


def audit_sample_separation(dataset_dir: str | Path) -> dict:
    """Verify no source_id appears both in a training split and testing I."""
    dataset_dir = Path(dataset_dir)
    train_side: set[str] = set()
    test_side: set[str] = set()
    for split in SPLITS:
        for png in (dataset_dir / split).rglob("*.png"):
            train_side.add(parse_artifact_name(png.name)[0])
    for png in (dataset_dir / TESTING_I).rglob("*.png"):
        test_side.add(parse_artifact_name(png.name)[0])
    overlap = sorted(train_side & test_side)
    if overlap:
        raise DataError(f"sample leak between training splits and testing I: {overlap}")
    return {"training_sources": len(train_side), "testing_I_sources": len(test_side)}


def audit_no_duplicates(dataset_dir: str | Path) -> dict:
    """Verify no file content lands in more than one split (hash audit)."""
    dataset_dir = Path(dataset_dir)
    seen: dict[str, str] = {}
    for split in SPLITS + (TESTING_I,):
        root = dataset_dir / split
        if not root.is_dir():
            continue
        for png in sorted(root.rglob("*.png")):
            digest = hashlib.sha256(png.read_bytes()).hexdigest()
            prev = seen.get(digest)
            if prev is not None and prev != split:
                raise DataError(
                    f"identical content in splits {prev!r} and {split!r}: {png.name}"
                )
            seen[digest] = split
    return {"files_hashed": len(seen)}
