"""Classifier configuration.

The defaults are the fixed experiment protocol: three 3x3 convolution blocks
each followed by 2x2 max pooling, a ReLU dense layer, a softmax head,
RMSprop at 1e-3, batch size 128, categorical cross-entropy, and early
stopping that watches validation accuracy with patience 40. Filter
counts and the dense width are free choices; the conventional 32/64/128
pyramid with a 128-wide dense layer is the recorded default.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class CnnConfig:
    input_size: int = 256
    conv_filters: tuple[int, int, int] = (32, 64, 128)
    dense_units: int = 128
    learning_rate: float = 1e-3
    batch_size: int = 128
    max_epochs: int = 200
    patience: int = 40

    def __post_init__(self):
        if self.input_size < 8:
            raise ValueError("input_size must be at least 8")
        if len(self.conv_filters) != 3:
            raise ValueError("the protocol uses exactly three convolution blocks")

    def architecture_string(self) -> str:
        convs = "-".join(f"conv3x3({f})+maxpool2x2" for f in self.conv_filters)
        return (f"input({self.input_size}x{self.input_size}x1)->{convs}"
                f"->flatten->dense({self.dense_units},relu)->dense(softmax)")

    def to_dict(self) -> dict:
        return {
            "input_size": self.input_size,
            "conv_filters": list(self.conv_filters),
            "dense_units": self.dense_units,
            "optimizer": "RMSprop",
            "learning_rate": self.learning_rate,
            "batch_size": self.batch_size,
            "loss": "categorical_crossentropy",
            "max_epochs": self.max_epochs,
            "early_stopping": {"monitor": "val_accuracy", "patience": self.patience},
            "architecture": self.architecture_string(),
        }
