"""Training and evaluation on dataset trees.

Training always watches validation accuracy with the configured patience
and evaluates the weights from the best validation epoch, whether or not
the early stop fired before the epoch cap.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import CnnConfig
from .data import SplitArrays, audit_sample_leak, class_names, load_split
from .model import build_model, set_determinism


@dataclass
class TrainedModel:
    model: object
    config: CnnConfig
    classes: tuple[str, ...]
    seed: int
    history: dict          # accuracy / val_accuracy / loss / val_loss per epoch
    best_epoch: int


@dataclass(frozen=True)
class EvalResult:
    accuracy: float
    confusion: np.ndarray   # rows = true class, columns = predicted
    n_images: int

    def misclassified(self) -> int:
        return int(self.n_images - np.trace(self.confusion))


def _one_hot(labels: np.ndarray, n_classes: int) -> np.ndarray:
    out = np.zeros((labels.shape[0], n_classes), dtype=np.float32)
    out[np.arange(labels.shape[0]), labels] = 1.0
    return out


class _BestWeights:
    """Keep the weights of the best validation-accuracy epoch."""

    def __init__(self):
        self.best = -np.inf
        self.weights = None
        self.epoch = 0

    def callback(self):
        import tensorflow as tf

        keeper = self

        class Keeper(tf.keras.callbacks.Callback):
            def on_epoch_end(self, epoch, logs=None):
                acc = (logs or {}).get("val_accuracy", -np.inf)
                if acc > keeper.best:
                    keeper.best = acc
                    keeper.weights = self.model.get_weights()
                    keeper.epoch = epoch

        return Keeper()


def train(dataset_dir: str | Path, config: CnnConfig, seed: int,
          classes: tuple[str, ...] | None = None, verbose: int = 0) -> TrainedModel:
    """Fit the classifier on a dataset tree's train/validation splits.

    The tree is leak-audited first; any overlap between training-side
    sources and testing I aborts before a single batch is seen.
    """
    import tensorflow as tf

    dataset_dir = Path(dataset_dir)
    audit_sample_leak(dataset_dir)
    names = classes if classes is not None else class_names(dataset_dir)

    train_split = load_split(dataset_dir, "train", config.input_size, names)
    val_split = load_split(dataset_dir, "validation", config.input_size, names)

    set_determinism(seed)
    rng = np.random.default_rng(seed)
    order = rng.permutation(train_split.images.shape[0])

    model = build_model(config, len(names))
    keeper = _BestWeights()
    early = tf.keras.callbacks.EarlyStopping(monitor="val_accuracy",
                                             patience=config.patience)
    history = model.fit(
        train_split.images[order], _one_hot(train_split.labels[order], len(names)),
        validation_data=(val_split.images, _one_hot(val_split.labels, len(names))),
        batch_size=config.batch_size, epochs=config.max_epochs,
        shuffle=False, verbose=verbose,
        callbacks=[early, keeper.callback()],
    )
    if keeper.weights is not None:
        model.set_weights(keeper.weights)
    return TrainedModel(model=model, config=config, classes=names, seed=seed,
                        history={k: [float(v) for v in vals]
                                 for k, vals in history.history.items()},
                        best_epoch=keeper.epoch)


def evaluate_arrays(trained: TrainedModel, split: SplitArrays) -> EvalResult:
    n = len(trained.classes)
    probs = trained.model.predict(split.images, batch_size=trained.config.batch_size,
                                  verbose=0)
    predicted = np.argmax(probs, axis=1)
    confusion = np.zeros((n, n), dtype=np.int64)
    for true, pred in zip(split.labels, predicted):
        confusion[true, pred] += 1
    # accuracy comes from the confusion matrix so the two always agree
    accuracy = float(np.trace(confusion) / confusion.sum())
    return EvalResult(accuracy=accuracy, confusion=confusion,
                      n_images=int(confusion.sum()))


def evaluate(trained: TrainedModel, dataset_dir: str | Path, split: str) -> EvalResult:
    arrays = load_split(Path(dataset_dir), split, trained.config.input_size,
                        trained.classes)
    return evaluate_arrays(trained, arrays)
