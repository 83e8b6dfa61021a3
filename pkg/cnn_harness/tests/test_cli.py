"""Harness CLI: train and evaluate round-trip."""

import json

from helpers import add_testing_split, build_toy_tree

from cnn_harness.cli import main


def run(argv):
    return main([str(a) for a in argv])


def test_train_then_evaluate(tmp_path):
    tree = tmp_path / "tree"
    build_toy_tree(tree)
    add_testing_split(tree)
    out = tmp_path / "run"
    code = run(["train", "--dataset", tree, "--out", out, "--seed", "1",
                "--input-size", "24", "--filters", "8,16,32", "--dense-units", "32",
                "--max-epochs", "4"])
    assert code == 0
    results = json.loads((out / "results.json").read_text())
    assert results["validation_accuracy"] == 1.0
    assert "testing_I_accuracy" in results
    assert "conv3x3(8)" in results["config"]["architecture"]
    assert (out / "model.keras").exists()
    assert (out / "curves.png").exists()

    assert run(["evaluate", "--model", out / "model.keras", "--dataset", tree,
                "--split", "testing_I"]) == 0


def test_leaky_tree_exits_with_data_error(tmp_path):
    tree = tmp_path / "tree"
    build_toy_tree(tree, n_train=4, n_val=2)
    add_testing_split(tree)
    leaked = next((tree / "train" / "left").glob("*.png"))
    (tree / "testing_I" / "left" / leaked.name).write_bytes(leaked.read_bytes())
    assert run(["train", "--dataset", tree, "--out", tmp_path / "out",
                "--input-size", "24", "--filters", "8,16,32", "--max-epochs", "1"]) == 3
