"""Keras model construction. TensorFlow is imported lazily."""

from __future__ import annotations

from .config import CnnConfig


def set_determinism(seed: int) -> None:
    import tensorflow as tf

    tf.keras.utils.set_random_seed(seed)
    tf.config.experimental.enable_op_determinism()


def build_model(config: CnnConfig, n_classes: int):
    import tensorflow as tf

    layers = [tf.keras.layers.Input((config.input_size, config.input_size, 1))]
    for filters in config.conv_filters:
        layers.append(tf.keras.layers.Conv2D(filters, 3, activation="relu"))
        layers.append(tf.keras.layers.MaxPooling2D(2))
    layers.append(tf.keras.layers.Flatten())
    layers.append(tf.keras.layers.Dense(config.dense_units, activation="relu"))
    layers.append(tf.keras.layers.Dense(n_classes, activation="softmax"))
    model = tf.keras.Sequential(layers)
    model.compile(
        optimizer=tf.keras.optimizers.RMSprop(learning_rate=config.learning_rate),
        loss="categorical_crossentropy",
        metrics=["accuracy"],
    )
    return model
