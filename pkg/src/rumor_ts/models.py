"""The nine named base learners and their training loop.

A feature vector of length L is fed to the recurrent stack as L time steps of
one feature each.  Learners whose name ends in ``_1`` size their single hidden
layer as ``(L + 2) // 2`` units at build time; the stacked variants use fixed
unit counts with dropout 0.25 after every recurrent layer.  Every learner ends
in a dense layer with two softmax outputs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .errors import ConfigError, TrainingError
from .neuralcore import (
    GRU,
    LSTM,
    Adam,
    Bidirectional,
    Dense,
    Dropout,
    Flatten,
    Network,
    SimpleRNN,
    one_hot,
    softmax,
    softmax_cross_entropy,
)

_CELL_CLASSES = {"simple": SimpleRNN, "lstm": LSTM, "gru": GRU}


def rule_of_thumb_units(seq_len: int) -> int:
    """Hidden width between input length and the two outputs: (L + 2) // 2."""
    return (seq_len + 2) // 2


@dataclass(frozen=True)
class LearnerSpec:
    """Architecture description of one base learner.

    ``cells`` names the cell kind of each hidden layer in order; ``units`` of
    None means every layer takes the rule-of-thumb width for the input length.
    """

    name: str
    cells: tuple[str, ...]
    units: tuple[int, ...] | None = None
    bidirectional: bool = False
    dropout_rate: float = 0.0
    hidden_activation: str = "tanh"
    flatten_before_output: bool = False

    def __post_init__(self) -> None:
        for cell in self.cells:
            if cell not in _CELL_CLASSES:
                raise ConfigError(f"unknown cell kind {cell!r}")
        if self.units is not None and len(self.units) != len(self.cells):
            raise ConfigError("units and cells must align")
        if self.bidirectional and len(self.cells) != 1:
            raise ConfigError("bidirectional learners have a single hidden layer")

    def resolved_units(self, seq_len: int) -> tuple[int, ...]:
        if self.units is not None:
            return self.units
        return (rule_of_thumb_units(seq_len),) * len(self.cells)


BASE_LEARNERS: dict[str, LearnerSpec] = {
    "RNN_1": LearnerSpec("RNN_1", ("simple",), hidden_activation="sigmoid"),
    "GRU_1": LearnerSpec("GRU_1", ("gru",)),
    "LSTM_1": LearnerSpec("LSTM_1", ("lstm",)),
    "BiGRU_1": LearnerSpec("BiGRU_1", ("gru",), bidirectional=True,
                           flatten_before_output=True),
    "BiLSTM_1": LearnerSpec("BiLSTM_1", ("lstm",), bidirectional=True,
                            flatten_before_output=True),
    "LG_1": LearnerSpec("LG_1", ("lstm", "gru")),
    "RNN_2": LearnerSpec("RNN_2", ("simple",) * 3, units=(16, 32, 64), dropout_rate=0.25),
    "GRU_2": LearnerSpec("GRU_2", ("gru",) * 3, units=(16, 32, 64), dropout_rate=0.25),
    "LSTM_2": LearnerSpec("LSTM_2", ("lstm",) * 3, units=(16, 32, 64), dropout_rate=0.25),
    "RNN_3": LearnerSpec("RNN_3", ("simple",) * 2, units=(64, 32), dropout_rate=0.25),
    "GRU_3": LearnerSpec("GRU_3", ("gru",) * 2, units=(64, 32), dropout_rate=0.25),
    "LSTM_3": LearnerSpec("LSTM_3", ("lstm",) * 2, units=(64, 32), dropout_rate=0.25),
}


def resolve_spec(spec: LearnerSpec | str) -> LearnerSpec:
    if isinstance(spec, LearnerSpec):
        return spec
    try:
        return BASE_LEARNERS[spec]
    except KeyError:
        raise ConfigError(
            f"unknown learner {spec!r}; known: {', '.join(sorted(BASE_LEARNERS))}"
        ) from None


def build_learner(spec: LearnerSpec | str, seq_len: int,
                  rng: np.random.Generator) -> Network:
    """Instantiate the network topology for ``spec`` on inputs of length ``seq_len``."""
    spec = resolve_spec(spec)
    if seq_len < 1:
        raise ConfigError("seq_len must be at least 1")
    units = spec.resolved_units(seq_len)
    layers = []
    n_in = 1
    for i, (cell_kind, width) in enumerate(zip(spec.cells, units)):
        last = i == len(spec.cells) - 1
        return_sequences = (not last) or spec.flatten_before_output
        cell_cls = _CELL_CLASSES[cell_kind]
        kwargs = {"return_sequences": return_sequences}
        if cell_kind == "simple":
            kwargs["activation"] = spec.hidden_activation
        if spec.bidirectional:
            layers.append(Bidirectional(cell_cls(n_in, width, rng, **kwargs),
                                        cell_cls(n_in, width, rng, **kwargs)))
            n_out_features = 2 * width
        else:
            layers.append(cell_cls(n_in, width, rng, **kwargs))
            n_out_features = width
        if spec.dropout_rate > 0.0:
            layers.append(Dropout(spec.dropout_rate, rng))
        n_in = n_out_features
    if spec.flatten_before_output:
        layers.append(Flatten())
        dense_in = seq_len * n_in
    else:
        dense_in = n_in
    layers.append(Dense(dense_in, 2, rng))
    return Network(layers)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-5
    batch_size: int = 32
    epochs: int = 300
    seed: int = 0
    class_weights: dict[int, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.learning_rate <= 0:
            raise ConfigError(f"learning rate must be positive, got {self.learning_rate}")
        if self.batch_size < 1:
            raise ConfigError(f"batch size must be at least 1, got {self.batch_size}")
        if self.epochs < 0:
            raise ConfigError(f"epochs must be non-negative, got {self.epochs}")


def train_network(net: Network, X: np.ndarray, y: np.ndarray,
                  cfg: TrainConfig, rng: np.random.Generator) -> tuple[float, int]:
    """Mini-batch training in place; returns (final epoch loss, epochs run).

    Rows are reshuffled every epoch with ``rng`` and the trailing short batch
    is kept.  The epoch loss is the per-sample weighted mean, so it does not
    depend on the shuffle order.
    """
    n = X.shape[0]
    X3 = X[:, :, None]
    onehot = one_hot(y)
    weights = np.ones(n)
    for cls, w in cfg.class_weights.items():
        weights[y == cls] = w
    optimizer = Adam(learning_rate=cfg.learning_rate)
    epoch_loss = float("nan")
    # Saturation overflows are caught by the explicit finiteness checks.
    with np.errstate(over="ignore", invalid="ignore"):
        for epoch in range(cfg.epochs):
            order = rng.permutation(n)
            total = 0.0
            for start in range(0, n, cfg.batch_size):
                batch = order[start:start + cfg.batch_size]
                logits = net.forward(X3[batch], train=True)
                loss, dlogits = softmax_cross_entropy(logits, onehot[batch], weights[batch])
                if not np.isfinite(loss):
                    raise TrainingError(f"training diverged at epoch {epoch + 1}: loss {loss}")
                net.backward(dlogits)
                optimizer.step(net.params(), net.grads())
                total += loss * len(batch)
            epoch_loss = total / n
    return epoch_loss, cfg.epochs


class SequenceClassifier(BaseEstimator, ClassifierMixin):
    """One trained base learner behind the usual fit/predict surface.

    ``spec`` is a learner name from :data:`BASE_LEARNERS` or an explicit
    :class:`LearnerSpec`.  ``class_weight`` maps label to loss multiplier.
    Training is fully deterministic for a fixed seed.
    """

    def __init__(self, spec: LearnerSpec | str = "GRU_1",
                 learning_rate: float = 1e-5, batch_size: int = 32,
                 epochs: int = 300, seed: int = 0,
                 class_weight: dict[int, float] | None = None):
        self.spec = spec
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.epochs = epochs
        self.seed = seed
        self.class_weight = class_weight

    def fit(self, X, y) -> "SequenceClassifier":
        X = check_array(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        if X.shape[0] == 0:
            raise ConfigError("cannot train on an empty dataset")
        if len(y) != X.shape[0]:
            raise ValueError("X and y length mismatch")
        present = set(np.unique(y).tolist())
        if not present <= {0, 1}:
            raise ConfigError(f"labels must be binary 0/1, got {sorted(present)}")
        if present != {0, 1}:
            raise ConfigError("training data must contain both classes")
        cfg = TrainConfig(learning_rate=self.learning_rate,
                          batch_size=self.batch_size, epochs=self.epochs,
                          seed=self.seed,
                          class_weights=dict(self.class_weight or {}))
        rng = np.random.default_rng(self.seed)
        self.spec_ = resolve_spec(self.spec)
        self.seq_len_ = X.shape[1]
        self.network_ = build_learner(self.spec_, self.seq_len_, rng)
        self.final_loss_, self.epochs_run_ = train_network(
            self.network_, X, y, cfg, rng)
        self.classes_ = np.array([0, 1])
        return self

    def predict_proba(self, X) -> np.ndarray:
        check_is_fitted(self, "network_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.seq_len_:
            raise ValueError(
                f"samples have length {X.shape[1]}, trained on {self.seq_len_}")
        logits = self.network_.forward(X[:, :, None], train=False)
        return softmax(logits)

    def predict(self, X) -> np.ndarray:
        probs = self.predict_proba(X)
        # Exact probability ties resolve to the non-rumour class.
        return (probs[:, 1] > probs[:, 0]).astype(np.int64)

    def manifest(self) -> dict:
        check_is_fitted(self, "network_")
        return {
            "name": self.spec_.name,
            "cells": list(self.spec_.cells),
            "units": list(self.spec_.resolved_units(self.seq_len_)),
            "bidirectional": self.spec_.bidirectional,
            "dropout_rate": self.spec_.dropout_rate,
            "hidden_activation": self.spec_.hidden_activation,
            "flatten_before_output": self.spec_.flatten_before_output,
            "seq_len": self.seq_len_,
            "learning_rate": self.learning_rate,
            "batch_size": self.batch_size,
            "epochs": self.epochs_run_,
            "seed": self.seed,
            "class_weight": {str(k): v for k, v in (self.class_weight or {}).items()},
            "final_loss": self.final_loss_,
        }

    def save(self, path: str | Path) -> None:
        """Checkpoint the parameters with the learner manifest alongside."""
        self.network_.save_checkpoint(path, manifest_extra={"learner": self.manifest()})

    @classmethod
    def load(cls, path: str | Path) -> "SequenceClassifier":
        path = Path(path)
        manifest = json.loads(path.with_suffix(".json").read_text(encoding="utf-8"))
        info = manifest["learner"]
        spec = LearnerSpec(
            name=info["name"],
            cells=tuple(info["cells"]),
            units=tuple(info["units"]),
            bidirectional=info["bidirectional"],
            dropout_rate=info["dropout_rate"],
            hidden_activation=info["hidden_activation"],
            flatten_before_output=info["flatten_before_output"],
        )
        clf = cls(spec=spec, learning_rate=info["learning_rate"],
                  batch_size=info["batch_size"], epochs=info["epochs"],
                  seed=info["seed"],
                  class_weight={int(k): v for k, v in info["class_weight"].items()})
        clf.spec_ = spec
        clf.seq_len_ = info["seq_len"]
        clf.network_ = build_learner(spec, info["seq_len"], np.random.default_rng(0))
        clf.network_.load_checkpoint(path)
        clf.final_loss_ = info["final_loss"]
        clf.epochs_run_ = info["epochs"]
        clf.classes_ = np.array([0, 1])
        return clf
