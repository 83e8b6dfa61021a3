"""Operator-facing command line: the whole pipeline without writing code.

Subcommands:

* ``gen-synth``       — write a seeded synthetic corpus (class/sample/frames)
* ``analyze``         — run the decomposition per sample, save spectra
* ``export-modes``    — render selected modes to PNG with provenance
* ``build-dataset``   — assemble train/validation/test/testing_I trees

Every command writes a ``run_manifest.json`` recording parameters, input
hashes and output hashes; identical inputs and seeds reproduce identical
output hashes. Exit codes: 0 ok, 2 usage/parameter error, 3 data error,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import __version__
from .datasets import (DatasetLayout, audit_no_duplicates, audit_sample_separation,
                       build_dataset01, build_dataset02, build_testing_I)
from .errors import DataError, ModalaugError, NumericalError
from .hodmd import HodmdParams, analyze
from .modes import SelectionPolicy, export_modes
from .serialize import load_spectrum, save_spectrum
from .snapshots import crop, load_crop_sidecar, load_sequence, to_snapshot_matrix
from .synth import bundled_spec, generate_class_corpus, load_corpus_spec

ANALYSIS_META = "analysis.json"
RUN_MANIFEST = "run_manifest.json"
JOBS_ENV = "MODALAUG_JOBS"


class UsageError(ModalaugError):
    """Bad parameter values caught before any work starts."""


def _default_jobs() -> int:
    raw = os.environ.get(JOBS_ENV, "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _hash_file(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _hash_tree(root: Path, skip: set[str] = frozenset()) -> str:
    """Combined digest over (relative path, content digest) pairs."""
    digest = hashlib.sha256()
    if root.is_file():
        digest.update(_hash_file(root).encode())
        return digest.hexdigest()
    for path in sorted(root.rglob("*")):
        if path.is_file() and path.name not in skip:
            digest.update(str(path.relative_to(root)).encode())
            digest.update(_hash_file(path).encode())
    return digest.hexdigest()


def _write_run_manifest(out_dir: Path, command: str, params: dict,
                        inputs: dict[str, Path], started: float) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = {
        "command": command,
        "version": __version__,
        "parameters": params,
        "input_hashes": {name: _hash_tree(path) for name, path in inputs.items()},
        "output_hash": _hash_tree(out_dir, skip={RUN_MANIFEST}),
        "wall_clock_s": round(time.monotonic() - started, 3),
    }
    (out_dir / RUN_MANIFEST).write_text(json.dumps(manifest, indent=2, sort_keys=True))


def _find_sample_dirs(root: Path) -> list[Path]:
    """Directories holding at least two PNGs directly are samples."""
    if not root.is_dir():
        raise DataError(f"not a directory: {root}")
    found = []
    for path in sorted([root] + [p for p in root.rglob("*") if p.is_dir()]):
        pngs = [f for f in path.iterdir() if f.suffix.lower() == ".png"]
        if len(pngs) >= 2:
            found.append(path)
    if not found:
        raise DataError(f"no frame directories found under {root}")
    return found


def _training_pool_filter(manifest_path: Path) -> set[str]:
    payload = json.loads(Path(manifest_path).read_text())
    section = payload.get("dataset", payload)
    pool: set[str] = set()
    for info in section.get("classes", {}).values():
        pool.update(info.get("training_pool", []))
    if not pool:
        raise DataError(f"{manifest_path} lists no training pool")
    return pool


# ---------------------------------------------------------------------------
# analyze
# ---------------------------------------------------------------------------

def _cmd_analyze(args) -> int:
    started = time.monotonic()
    out_dir = Path(args.out)
    rect, sidecar_dt = (None, None)
    if args.crop:
        rect, sidecar_dt = load_crop_sidecar(args.crop)
    dt = args.dt if args.dt is not None else sidecar_dt
    if dt is None:
        raise UsageError("--dt is required (no crop sidecar provided one)")
    if dt <= 0:
        raise UsageError(f"--dt must be positive, got {dt}")

    root = Path(args.input)
    samples = _find_sample_dirs(root)
    if args.pool_from:
        pool = _training_pool_filter(Path(args.pool_from))
        samples = [s for s in samples if s.name in pool]
        if not samples:
            raise DataError("no sample directories match the training pool")

    params = HodmdParams(dt=dt, d=args.d, eps_svd=args.eps_svd, eps_dmd=args.eps_dmd)

    def run_one(sample_dir: Path) -> str:
        rel = sample_dir.relative_to(root) if sample_dir != root else Path(sample_dir.name)
        seq = load_sequence(sample_dir, dt, source_id=sample_dir.name)
        if args.d is not None and args.d > seq.k - 1:
            raise UsageError(
                f"--d {args.d} is too large for {sample_dir.name}: K={seq.k} frames "
                f"allow at most d={seq.k - 1}"
            )
        if rect is not None:
            seq = crop(seq, rect)
        matrix = to_snapshot_matrix(seq)
        truncation, spectrum = analyze(matrix, params)
        dest = out_dir / rel
        save_spectrum(dest, spectrum, matrix.nx, matrix.ny)
        class_label = sample_dir.parent.name if sample_dir.parent != root.parent else None
        (dest / ANALYSIS_META).write_text(json.dumps({
            "source_id": sample_dir.name,
            "class_label": class_label if sample_dir != root else None,
            "nx": matrix.nx, "ny": matrix.ny, "k": matrix.k,
            "n_retained": truncation.n_retained,
            "m_retained": spectrum.m_retained,
            "params": {"dt": params.dt, "d": params.resolve_d(matrix.k),
                       "eps_svd": params.eps_svd, "eps_dmd": params.eps_dmd},
        }, indent=2, sort_keys=True))
        return str(rel)

    with ThreadPoolExecutor(max_workers=args.jobs) as pool_exec:
        done = list(pool_exec.map(run_one, samples))
    print(f"analyzed {len(done)} sample(s) -> {out_dir}")
    _write_run_manifest(out_dir, "analyze", {
        "dt": dt, "d": args.d, "eps_svd": args.eps_svd, "eps_dmd": args.eps_dmd,
        "crop": args.crop, "pool_from": args.pool_from, "jobs": args.jobs,
    }, {"input": root}, started)
    return 0


# ---------------------------------------------------------------------------
# export-modes
# ---------------------------------------------------------------------------

def _cmd_export_modes(args) -> int:
    started = time.monotonic()
    root = Path(args.spectra)
    out_dir = Path(args.out)
    spectrum_dirs = sorted(p.parent for p in root.rglob("modes.bin"))
    if not spectrum_dirs:
        raise DataError(f"no saved spectra under {root}")

    manual = None
    if args.select:
        try:
            manual = tuple(int(tok) for tok in args.select.split(","))
        except ValueError as exc:
            raise UsageError(f"--select wants comma-separated integers: {exc}") from exc
    policy = SelectionPolicy(count=args.count, strategy=args.strategy,
                             manual_indices=manual, noise_cutoff=args.noise_cutoff)

    def run_one(spec_dir: Path) -> str:
        rel = spec_dir.relative_to(root) if spec_dir != root else Path(spec_dir.name)
        spectrum, nx, ny = load_spectrum(spec_dir)
        meta_path = spec_dir / ANALYSIS_META
        meta = json.loads(meta_path.read_text()) if meta_path.exists() else {}
        source_id = meta.get("source_id", spec_dir.name)
        saved = meta.get("params", {})
        params = HodmdParams(**saved) if saved else None
        export_modes(spectrum, (nx, ny), out_dir / rel, source_id,
                     policy=policy, rendering=args.rendering, params=params,
                     class_label=meta.get("class_label"))
        return str(rel)

    with ThreadPoolExecutor(max_workers=args.jobs) as pool_exec:
        done = list(pool_exec.map(run_one, spectrum_dirs))
    print(f"exported modes for {len(done)} sample(s) -> {out_dir}")
    _write_run_manifest(out_dir, "export-modes", {
        "count": args.count, "strategy": args.strategy, "rendering": args.rendering,
        "select": args.select, "noise_cutoff": args.noise_cutoff, "jobs": args.jobs,
    }, {"spectra": root}, started)
    return 0


# ---------------------------------------------------------------------------
# build-dataset
# ---------------------------------------------------------------------------

def _cmd_build_dataset(args) -> int:
    started = time.monotonic()
    corpus = Path(args.corpus)
    out_dir = Path(args.out)
    if args.classes:
        classes = tuple(tok for tok in args.classes.split(",") if tok)
    else:
        if not corpus.is_dir():
            raise DataError(f"not a directory: {corpus}")
        classes = tuple(sorted(p.name for p in corpus.iterdir() if p.is_dir()))
    if not classes:
        raise UsageError("no classes given and none found in the corpus")
    layout = DatasetLayout(classes=classes, scale=args.scale,
                           train_samples=args.train_samples,
                           heldout_samples=args.heldout_samples,
                           random_frame_offset=args.random_offset)

    inputs = {"corpus": corpus}
    if args.augment and args.augment != "none":
        modes_dir = Path(args.augment)
        inputs["modes"] = modes_dir
        with tempfile.TemporaryDirectory(prefix="modalaug-ds01-") as tmp:
            build_dataset01(corpus, layout, args.seed, tmp)
            build_dataset02(tmp, modes_dir, layout, args.seed, out_dir)
    else:
        build_dataset01(corpus, layout, args.seed, out_dir)
    build_testing_I(corpus, layout, args.seed, out_dir)

    separation = audit_sample_separation(out_dir)
    duplicates = audit_no_duplicates(out_dir)
    print(f"built dataset ({'02' if 'modes' in inputs else '01'}) -> {out_dir}")
    print(f"audit: {separation['training_sources']} training sources, "
          f"{separation['testing_I_sources']} testing-I sources, "
          f"{duplicates['files_hashed']} files hashed, no leaks")
    _write_run_manifest(out_dir, "build-dataset", {
        "scale": args.scale, "seed": args.seed, "classes": list(classes),
        "augment": args.augment, "train_samples": args.train_samples,
        "heldout_samples": args.heldout_samples, "random_offset": args.random_offset,
    }, inputs, started)
    return 0


# ---------------------------------------------------------------------------
# gen-synth
# ---------------------------------------------------------------------------

def _cmd_gen_synth(args) -> int:
    started = time.monotonic()
    out_dir = Path(args.out)
    if args.spec:
        templates = load_corpus_spec(args.spec)
        inputs = {"spec": Path(args.spec)}
    else:
        templates = bundled_spec(n_classes=args.classes, nx=args.nx, ny=args.ny,
                                 k=args.frames, dt=args.dt,
                                 noise_amplitude=args.noise)
        inputs = {}
    generate_class_corpus(templates, args.samples, out_dir, seed=args.seed,
                          frames_per_sample=args.frames,
                          float_sidecar=args.float_sidecar)
    print(f"generated {len(templates)} classes x {args.samples} samples -> {out_dir}")
    _write_run_manifest(out_dir, "gen-synth", {
        "spec": args.spec, "classes": args.classes, "samples": args.samples,
        "frames": args.frames, "seed": args.seed, "nx": args.nx, "ny": args.ny,
        "dt": args.dt, "noise": args.noise, "float_sidecar": args.float_sidecar,
    }, inputs, started)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="modalaug",
        description="Modal decomposition of image sequences and mode-based augmentation.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="decompose frame sequences into modes")
    p.add_argument("input", help="sample directory or corpus root")
    p.add_argument("--dt", type=float, help="frame interval in seconds")
    p.add_argument("--d", type=int, help="delay index (default: 10%% of K)")
    p.add_argument("--eps-svd", type=float, default=1e-4)
    p.add_argument("--eps-dmd", type=float, default=1e-3)
    p.add_argument("--crop", help="JSON sidecar with x0,y0,width,height[,dt]")
    p.add_argument("--pool-from", help="dataset manifest restricting samples to its training pool")
    p.add_argument("--jobs", type=int, default=_default_jobs())
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("export-modes", help="render selected modes to PNG")
    p.add_argument("spectra", help="directory of saved spectra")
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--strategy", default="top_amplitude",
                   choices=["top_amplitude", "manual_list", "amplitude_with_noise_filter"])
    p.add_argument("--select", help="comma-separated mode indices for manual_list")
    p.add_argument("--rendering", default="real_part",
                   choices=["real_part", "modulus", "phase"])
    p.add_argument("--noise-cutoff", type=float)
    p.add_argument("--jobs", type=int, default=_default_jobs())
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_export_modes)

    p = sub.add_parser("build-dataset", help="assemble train/validation/test/testing_I trees")
    p.add_argument("--corpus", required=True)
    p.add_argument("--augment", default="none", help="mode-image directory, or 'none'")
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--classes", help="comma-separated class labels (default: all)")
    p.add_argument("--train-samples", type=int, default=20)
    p.add_argument("--heldout-samples", type=int, default=6)
    p.add_argument("--random-offset", action="store_true",
                   help="seeded random start frame instead of frame 0")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_build_dataset)

    p = sub.add_parser("gen-synth", help="generate a synthetic corpus")
    p.add_argument("--spec", help="JSON corpus spec (default: bundled classes)")
    p.add_argument("--classes", type=int, default=5, help="bundled class count")
    p.add_argument("--samples", type=int, default=26)
    p.add_argument("--frames", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--nx", type=int, default=64)
    p.add_argument("--ny", type=int, default=64)
    p.add_argument("--dt", type=float, default=0.02)
    p.add_argument("--noise", type=float, default=0.01)
    p.add_argument("--float-sidecar", action="store_true",
                   help="also write pre-quantization float frames")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gen_synth)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
