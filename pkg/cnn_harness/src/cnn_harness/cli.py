"""Command line for the classification harness.

``run-experiment`` reproduces the two-testcase comparison from one
command; ``train`` and ``evaluate`` expose the lower-level pieces.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import CnnConfig
from .data import DatasetTreeError
from .experiment import (AnalysisParams, ExperimentError, ExperimentPlan,
                         render_table, run_experiment)


def _config_from(args) -> CnnConfig:
    filters = tuple(int(tok) for tok in args.filters.split(","))
    return CnnConfig(input_size=args.input_size, conv_filters=filters,
                     dense_units=args.dense_units, learning_rate=args.learning_rate,
                     batch_size=args.batch_size, max_epochs=args.max_epochs,
                     patience=args.patience)


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input-size", type=int, default=256)
    p.add_argument("--filters", default="32,64,128")
    p.add_argument("--dense-units", type=int, default=128)
    p.add_argument("--learning-rate", type=float, default=1e-3)
    p.add_argument("--batch-size", type=int, default=128)
    p.add_argument("--max-epochs", type=int, default=200)
    p.add_argument("--patience", type=int, default=40)


def _cmd_run_experiment(args) -> int:
    plan = ExperimentPlan(
        corpus=Path(args.corpus),
        out_dir=Path(args.out),
        seeds=tuple(int(tok) for tok in args.seeds.split(",")),
        class_counts=tuple(int(tok) for tok in args.class_counts.split(",")),
        scale=args.scale,
        train_samples=args.train_samples,
        heldout_samples=args.heldout_samples,
        drop_class=args.drop_class,
        config=_config_from(args),
        analysis=AnalysisParams(dt=args.dt, d=args.d, eps_svd=args.eps_svd,
                                eps_dmd=args.eps_dmd),
        figures=not args.no_figures,
        keep_datasets=args.keep_datasets,
    )
    report = run_experiment(plan)
    print(render_table(report["table"]))
    for count, info in report["augmentation_delta_testing_I"].items():
        if info["mean_delta"] is not None:
            print(f"{count}-class testing-I delta: mean {info['mean_delta']:+.3f}, "
                  f"{info['wins']}/{info['seeds']} seeds improved")
    print(f"report: {plan.out_dir / 'report.json'}")
    return 0


def _cmd_train(args) -> int:
    from .figures import training_curves
    from .training import evaluate, train

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    config = _config_from(args)
    trained = train(args.dataset, config, args.seed, verbose=args.verbose)
    results = {
        "config": config.to_dict(),
        "seed": args.seed,
        "classes": list(trained.classes),
        "history": trained.history,
        "best_epoch": trained.best_epoch,
        "validation_accuracy": float(max(trained.history["val_accuracy"])),
    }
    for split in ("test", "testing_I"):
        if (Path(args.dataset) / split).is_dir():
            result = evaluate(trained, args.dataset, split)
            results[f"{split}_accuracy"] = result.accuracy
            results[f"{split}_confusion"] = result.confusion.tolist()
    trained.model.save(out / "model.keras")
    training_curves(trained.history, out / "curves.png")
    (out / "results.json").write_text(json.dumps(results, indent=2, sort_keys=True))
    print(f"validation accuracy {results['validation_accuracy']:.3f} -> {out}")
    return 0


def _cmd_evaluate(args) -> int:
    import numpy as np
    import tensorflow as tf

    from .data import load_split
    from .training import EvalResult

    model = tf.keras.models.load_model(args.model)
    size = model.input_shape[1]
    arrays = load_split(args.dataset, args.split, size)
    probs = model.predict(arrays.images, verbose=0)
    predicted = np.argmax(probs, axis=1)
    n = len(arrays.class_names)
    confusion = np.zeros((n, n), dtype=np.int64)
    for true, pred in zip(arrays.labels, predicted):
        confusion[true, pred] += 1
    result = EvalResult(accuracy=float(np.trace(confusion) / confusion.sum()),
                        confusion=confusion, n_images=int(confusion.sum()))
    print(json.dumps({"split": args.split, "accuracy": result.accuracy,
                      "misclassified": result.misclassified(),
                      "confusion": confusion.tolist()}, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cnn-harness",
                                     description="CNN classification harness.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run-experiment",
                       help="compare frames-only vs mode-augmented training")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seeds", default="0,1,2,3,4")
    p.add_argument("--class-counts", default="5,4")
    p.add_argument("--scale", type=float, default=0.25)
    p.add_argument("--train-samples", type=int, default=20)
    p.add_argument("--heldout-samples", type=int, default=6)
    p.add_argument("--drop-class", help="class excluded in the 4-class variant")
    p.add_argument("--dt", type=float, default=0.02)
    p.add_argument("--d", type=int)
    p.add_argument("--eps-svd", type=float, default=1e-3)
    p.add_argument("--eps-dmd", type=float, default=1e-3)
    p.add_argument("--no-figures", action="store_true")
    p.add_argument("--keep-datasets", action="store_true")
    _add_config_flags(p)
    p.set_defaults(func=_cmd_run_experiment)

    p = sub.add_parser("train", help="train on one dataset tree")
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--verbose", type=int, default=0)
    _add_config_flags(p)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("evaluate", help="evaluate a saved model on a split")
    p.add_argument("--model", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--split", default="testing_I")
    p.set_defaults(func=_cmd_evaluate)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DatasetTreeError as exc:
        print(f"dataset error: {exc}", file=sys.stderr)
        return 3
    except ExperimentError as exc:
        print(f"experiment error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
