"""The two-testcase comparison experiment.

For every seed this builds, through the decomposition toolkit's CLI, a
frames-only dataset (testcase 01) and a mode-augmented dataset
(testcase 02) from the same corpus and the same sample partition, trains
the classifier on both, and evaluates on the shared held-out testing I
split. The report carries per-run records, an accuracy summary table
(validation / testing / testing I rows, one column per class-count and
dataset), and the per-seed augmentation deltas on unseen data.
"""

from __future__ import annotations

import json
import subprocess
import sys
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import CnnConfig
from .data import class_names
from .figures import confusion_figure, training_curves
from .training import evaluate, train

TESTCASES = ("01", "02")


class ExperimentError(Exception):
    pass


@dataclass(frozen=True)
class AnalysisParams:
    """Decomposition settings forwarded to the toolkit CLI."""

    dt: float = 0.02
    d: int | None = None
    eps_svd: float = 1e-3
    eps_dmd: float = 1e-3


@dataclass(frozen=True)
class ExperimentPlan:
    corpus: Path
    out_dir: Path
    seeds: tuple[int, ...] = (0, 1, 2, 3, 4)
    class_counts: tuple[int, ...] = (5, 4)
    scale: float = 0.25
    train_samples: int = 20
    heldout_samples: int = 6
    drop_class: str | None = None      # excluded in the 4-class variant
    config: CnnConfig = field(default_factory=CnnConfig)
    analysis: AnalysisParams = field(default_factory=AnalysisParams)
    figures: bool = True
    keep_datasets: bool = False

    def __post_init__(self):
        bad = set(self.class_counts) - {4, 5}
        if bad:
            raise ExperimentError(f"class counts must be 4 or 5, got {sorted(bad)}")
        if not self.seeds:
            raise ExperimentError("need at least one seed")


def _toolkit(args: list[str]) -> None:
    cmd = [sys.executable, "-m", "modalaug.cli", *map(str, args)]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode != 0:
        raise ExperimentError(
            f"toolkit command failed ({proc.returncode}): {' '.join(cmd)}\n{proc.stderr}"
        )


def _build_datasets(plan: ExperimentPlan, seed: int, work: Path) -> dict[str, Path]:
    """dataset-01 and dataset-02 trees for one seed, via the toolkit CLI."""
    ds01 = work / "ds01"
    ds02 = work / "ds02"
    spectra = work / "spectra"
    modes = work / "modes"
    common = ["build-dataset", "--corpus", plan.corpus, "--scale", plan.scale,
              "--seed", seed, "--train-samples", plan.train_samples,
              "--heldout-samples", plan.heldout_samples]
    _toolkit([*common, "--out", ds01])
    analyze = ["analyze", plan.corpus, "--pool-from", ds01 / "dataset_manifest.json",
               "--dt", plan.analysis.dt, "--eps-svd", plan.analysis.eps_svd,
               "--eps-dmd", plan.analysis.eps_dmd, "--out", spectra]
    if plan.analysis.d is not None:
        analyze += ["--d", plan.analysis.d]
    _toolkit(analyze)
    _toolkit(["export-modes", spectra, "--count", 10, "--out", modes])
    _toolkit([*common, "--augment", modes, "--out", ds02])
    return {"01": ds01, "02": ds02}


def _labels_for(plan: ExperimentPlan, all_labels: tuple[str, ...],
                class_count: int) -> tuple[str, ...]:
    if class_count == 5:
        return all_labels
    drop = plan.drop_class if plan.drop_class is not None else all_labels[0]
    if drop not in all_labels:
        raise ExperimentError(f"cannot drop unknown class {drop!r}")
    return tuple(label for label in all_labels if label != drop)


def _run_one(plan: ExperimentPlan, dataset: Path, labels: tuple[str, ...],
             seed: int, run_id: str, fig_dir: Path | None) -> dict:
    trained = train(dataset, plan.config, seed, classes=labels)
    test = evaluate(trained, dataset, "test")
    unseen = evaluate(trained, dataset, "testing_I")
    record = {
        "run_id": run_id,
        "seed": seed,
        "classes": list(labels),
        "epochs_trained": len(trained.history.get("accuracy", [])),
        "best_epoch": trained.best_epoch,
        "validation_accuracy": float(max(trained.history["val_accuracy"])),
        "test_accuracy": test.accuracy,
        "testing_I_accuracy": unseen.accuracy,
        "test_confusion": test.confusion.tolist(),
        "testing_I_confusion": unseen.confusion.tolist(),
        "test_misclassified": test.misclassified(),
        "testing_I_misclassified": unseen.misclassified(),
    }
    if fig_dir is not None:
        fig_dir.mkdir(parents=True, exist_ok=True)
        training_curves(trained.history, fig_dir / f"{run_id}_curves.png", run_id)
        confusion_figure(test.confusion, labels, fig_dir / f"{run_id}_test_cm.png",
                         f"{run_id} test")
        confusion_figure(unseen.confusion, labels,
                         fig_dir / f"{run_id}_testing_I_cm.png", f"{run_id} testing I")
    return record


def _summary_table(runs: list[dict], class_counts: tuple[int, ...]) -> dict:
    columns = [f"{c}_classes_dataset_{tc}" for c in class_counts for tc in TESTCASES]
    cells: dict[str, dict[str, float]] = {}
    for column in columns:
        parts = column.split("_")
        count, testcase = int(parts[0]), parts[-1]
        matched = [r for r in runs
                   if len(r["classes"]) == count and r["run_id"].endswith(f"tc{testcase}")]
        if not matched:
            continue
        cells[column] = {
            "validation": float(np.mean([r["validation_accuracy"] for r in matched])),
            "testing": float(np.mean([r["test_accuracy"] for r in matched])),
            "testing_I": float(np.mean([r["testing_I_accuracy"] for r in matched])),
        }
    return {"rows": ["validation", "testing", "testing_I"],
            "columns": columns, "cells": cells}


def _augmentation_deltas(runs: list[dict], class_counts: tuple[int, ...],
                         seeds: tuple[int, ...]) -> dict:
    deltas: dict[str, dict] = {}
    for count in class_counts:
        per_seed = []
        for seed in seeds:
            pair = {}
            for r in runs:
                if r["seed"] == seed and len(r["classes"]) == count:
                    pair[r["run_id"][-2:]] = r["testing_I_accuracy"]
            if set(pair) == {"01", "02"}:
                per_seed.append({"seed": seed, "testcase_01": pair["01"],
                                 "testcase_02": pair["02"],
                                 "delta": pair["02"] - pair["01"]})
        values = [p["delta"] for p in per_seed]
        deltas[str(count)] = {
            "per_seed": per_seed,
            "mean_delta": float(np.mean(values)) if values else None,
            "wins": int(sum(v >= 0 for v in values)),
            "seeds": len(values),
        }
    return deltas


def render_table(table: dict) -> str:
    width = max(len(c) for c in table["columns"]) + 2
    lines = [" " * 12 + "".join(f"{c:>{width}}" for c in table["columns"])]
    for row in table["rows"]:
        cells = [table["cells"].get(c, {}).get(row) for c in table["columns"]]
        rendered = "".join(
            f"{'-' if v is None else f'{v * 100:.1f}%':>{width}}" for v in cells)
        lines.append(f"{row:<12}{rendered}")
    return "\n".join(lines)


def run_experiment(plan: ExperimentPlan) -> dict:
    """Build, train and evaluate both testcases for every seed."""
    started = time.monotonic()
    plan.out_dir.mkdir(parents=True, exist_ok=True)
    fig_dir = plan.out_dir / "figures" if plan.figures else None

    runs: list[dict] = []
    for seed in plan.seeds:
        with tempfile.TemporaryDirectory(prefix="cnn-harness-") as scratch:
            work = plan.out_dir / "datasets" / f"seed{seed}" if plan.keep_datasets \
                else Path(scratch)
            work.mkdir(parents=True, exist_ok=True)
            datasets = _build_datasets(plan, seed, work)
            all_labels = class_names(datasets["01"])
            for count in plan.class_counts:
                labels = _labels_for(plan, all_labels, count)
                for testcase in TESTCASES:
                    run_id = f"seed{seed}_{count}c_tc{testcase}"
                    runs.append(_run_one(plan, datasets[testcase], labels, seed,
                                         run_id, fig_dir))

    report = {
        "config": plan.config.to_dict(),
        "analysis": {"dt": plan.analysis.dt, "d": plan.analysis.d,
                     "eps_svd": plan.analysis.eps_svd, "eps_dmd": plan.analysis.eps_dmd},
        "protocol": {"seeds": list(plan.seeds), "class_counts": list(plan.class_counts),
                     "scale": plan.scale, "train_samples": plan.train_samples,
                     "heldout_samples": plan.heldout_samples,
                     "corpus": str(plan.corpus)},
        "runs": runs,
        "table": _summary_table(runs, plan.class_counts),
        "augmentation_delta_testing_I": _augmentation_deltas(runs, plan.class_counts,
                                                             plan.seeds),
        "wall_clock_s": round(time.monotonic() - started, 1),
    }
    (plan.out_dir / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True))
    (plan.out_dir / "summary.txt").write_text(render_table(report["table"]) + "\n")
    return report
