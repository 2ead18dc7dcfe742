"""Central-difference verification of analytic gradients.

Intended for small networks (a few thousand parameters at most): every
parameter entry costs two forward passes.  Dropout masks are frozen for the
duration so repeated passes see the same stochastic circuit.
"""

from __future__ import annotations

import numpy as np

from .losses import softmax_cross_entropy
from .network import Network


def gradient_check(network: Network, x: np.ndarray, onehot: np.ndarray,
                   sample_weight: np.ndarray | None = None,
                   epsilon: float = 1e-5) -> float:
    """Max relative error between analytic and finite-difference gradients."""

    def loss_only() -> float:
        logits = network.forward(x, train=True)
        loss, _ = softmax_cross_entropy(logits, onehot, sample_weight)
        return loss

    network.freeze_dropout()
    try:
        logits = network.forward(x, train=True)
        _, dlogits = softmax_cross_entropy(logits, onehot, sample_weight)
        network.backward(dlogits)
        analytic = {k: v.copy() for k, v in network.grads().items()}

        worst = 0.0
        params = network.params()
        for key, arr in params.items():
            flat = arr.reshape(-1)
            ana = analytic[key].reshape(-1)
            for j in range(flat.size):
                orig = flat[j]
                flat[j] = orig + epsilon
                up = loss_only()
                flat[j] = orig - epsilon
                down = loss_only()
                flat[j] = orig
                numeric = (up - down) / (2.0 * epsilon)
                # Central differences bottom out around 1e-11 absolute, so
                # entries much smaller than the floor are compared absolutely.
                denom = max(abs(ana[j]), abs(numeric), 1e-6)
                worst = max(worst, abs(ana[j] - numeric) / denom)
        return worst
    finally:
        network.unfreeze_dropout()
