"""Training-curve and confusion-matrix figures."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def training_curves(history: dict, path: str | Path, title: str = "") -> None:
    epochs = np.arange(1, len(history.get("accuracy", [])) + 1)
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.plot(epochs, history.get("accuracy", []), label="training")
    ax.plot(epochs, history.get("val_accuracy", []), label="validation")
    ax.set_xlabel("epoch")
    ax.set_ylabel("accuracy")
    ax.set_ylim(0.0, 1.02)
    ax.legend(loc="lower right")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def confusion_figure(confusion: np.ndarray, classes: tuple[str, ...],
                     path: str | Path, title: str = "") -> None:
    n = len(classes)
    fig, ax = plt.subplots(figsize=(1.0 * n + 2.5, 1.0 * n + 2))
    ax.imshow(confusion, cmap="Blues")
    for i in range(n):
        for j in range(n):
            ax.text(j, i, str(int(confusion[i, j])), ha="center", va="center",
                    color="black" if confusion[i, j] < confusion.max() * 0.6 else "white")
    ax.set_xticks(range(n), classes, rotation=45, ha="right")
    ax.set_yticks(range(n), classes)
    ax.set_xlabel("predicted")
    ax.set_ylabel("true")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
