"""Softmax output with class-weighted categorical cross-entropy."""

from __future__ import annotations

import numpy as np


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax, stabilized by max subtraction."""
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def softmax_cross_entropy(logits: np.ndarray, onehot: np.ndarray,
                          sample_weight: np.ndarray | None = None,
                          ) -> tuple[float, np.ndarray]:
    """Weighted mean cross-entropy over the batch and its logit gradient.

    Per row the loss is ``-w * log(softmax(logits)[y])`` and the gradient is
    ``w * (softmax(logits) - onehot)``; both are divided by the batch size so
    the returned pair belongs to the batch-mean objective.
    """
    logits = np.atleast_2d(logits)
    onehot = np.atleast_2d(onehot)
    n = logits.shape[0]
    if sample_weight is None:
        sample_weight = np.ones(n)
    sample_weight = np.asarray(sample_weight, dtype=np.float64).reshape(n)
    probs = softmax(logits)
    picked = np.clip((probs * onehot).sum(axis=1), 1e-300, None)
    loss = float(np.mean(sample_weight * -np.log(picked)))
    grad = sample_weight[:, None] * (probs - onehot) / n
    return loss, grad


def one_hot(labels: np.ndarray, n_classes: int = 2) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64)
    out = np.zeros((len(labels), n_classes))
    out[np.arange(len(labels)), labels] = 1.0
    return out
