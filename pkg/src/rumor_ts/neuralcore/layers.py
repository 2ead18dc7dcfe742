"""Minimal sequence-model layers with hand-derived backward passes.

Everything runs in float64.  Sequence inputs are shaped
``(batch, time, features)``; a recurrent layer emits either its final hidden
state ``(batch, hidden)`` or the full state sequence ``(batch, time, hidden)``.
Each layer stores its parameters in ``self.params`` and, after ``backward``,
the matching gradients in ``self.grads`` (same keys, same shapes).

Gate weights are kept fused: one input matrix ``W`` of shape
``(features, gates * hidden)``, one recurrent matrix ``U`` of shape
``(hidden, gates * hidden)`` and one bias of length ``gates * hidden``,
with 4 gates for LSTM (input, forget, candidate, output) and 3 for GRU
(update, reset, candidate).
"""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError


def uniform_init(shape: tuple[int, ...], rng: np.random.Generator) -> np.ndarray:
    """I.i.d. Uniform(-0.5, 0.5) draws, the initializer used for all weights."""
    return rng.uniform(-0.5, 0.5, size=shape)


def sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


_ACTIVATIONS = ("tanh", "sigmoid")


class Layer:
    """Base class; subclasses fill ``params``/``grads`` and the two passes."""

    def __init__(self) -> None:
        self.params: dict[str, np.ndarray] = {}
        self.grads: dict[str, np.ndarray] = {}

    def forward(self, x: np.ndarray, train: bool = False) -> np.ndarray:
        raise NotImplementedError

    def backward(self, grad: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def describe(self) -> dict:
        raise NotImplementedError


class Dense(Layer):
    def __init__(self, n_in: int, n_out: int, rng: np.random.Generator):
        super().__init__()
        self.n_in, self.n_out = n_in, n_out
        self.params = {"W": uniform_init((n_in, n_out), rng),
                       "b": np.zeros(n_out)}

    def forward(self, x, train=False):
        self._x = x
        return x @ self.params["W"] + self.params["b"]

    def backward(self, grad):
        self.grads = {"W": self._x.T @ grad, "b": grad.sum(axis=0)}
        return grad @ self.params["W"].T

    def describe(self):
        return {"kind": "dense", "n_in": self.n_in, "n_out": self.n_out}


class Flatten(Layer):
    """(batch, time, features) -> (batch, time * features)."""

    def forward(self, x, train=False):
        self._shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, grad):
        return grad.reshape(self._shape)

    def describe(self):
        return {"kind": "flatten"}


class Dropout(Layer):
    """Inverted dropout: train-time masking with 1/(1-rate) rescaling.

    ``freeze()`` pins the next drawn mask until ``unfreeze()``, which makes
    repeated forward passes deterministic for finite-difference checks.
    """

    def __init__(self, rate: float, rng: np.random.Generator):
        super().__init__()
        if not 0.0 <= rate < 1.0:
            raise ConfigError(f"dropout rate must be in [0, 1), got {rate}")
        self.rate = rate
        self.rng = rng
        self._frozen = False
        self._mask: np.ndarray | None = None

    def freeze(self) -> None:
        self._frozen = True
        self._mask = None

    def unfreeze(self) -> None:
        self._frozen = False
        self._mask = None

    def forward(self, x, train=False):
        if not train or self.rate == 0.0:
            self._last_mask = None
            return x
        if self._frozen and self._mask is not None and self._mask.shape == x.shape:
            mask = self._mask
        else:
            mask = (self.rng.random(x.shape) >= self.rate) / (1.0 - self.rate)
            if self._frozen:
                self._mask = mask
        self._last_mask = mask
        return x * mask

    def backward(self, grad):
        if self._last_mask is None:
            return grad
        return grad * self._last_mask

    def describe(self):
        return {"kind": "dropout", "rate": self.rate}


class SimpleRNN(Layer):
    """Plain recurrence h_t = act(x_t W + h_{t-1} U + b)."""

    def __init__(self, n_in: int, hidden: int, rng: np.random.Generator,
                 activation: str = "tanh", return_sequences: bool = False):
        super().__init__()
        if activation not in _ACTIVATIONS:
            raise ConfigError(f"unsupported activation {activation!r}")
        self.n_in, self.hidden = n_in, hidden
        self.activation = activation
        self.return_sequences = return_sequences
        self.params = {"W": uniform_init((n_in, hidden), rng),
                       "U": uniform_init((hidden, hidden), rng),
                       "b": np.zeros(hidden)}

    def _act(self, z):
        return np.tanh(z) if self.activation == "tanh" else sigmoid(z)

    def _act_grad(self, h):
        return 1.0 - h * h if self.activation == "tanh" else h * (1.0 - h)

    def step(self, h_prev: np.ndarray, x_t: np.ndarray) -> np.ndarray:
        """Single recurrence step; used by tests and the sequence loop alike."""
        return self._act(x_t @ self.params["W"] + h_prev @ self.params["U"]
                         + self.params["b"])

    def forward(self, x, train=False):
        if x.shape[1] == 0:
            raise ValueError("empty sequence")
        batch, steps, _ = x.shape
        self._x = x
        self._hs = np.zeros((batch, steps + 1, self.hidden))
        for t in range(steps):
            self._hs[:, t + 1] = self.step(self._hs[:, t], x[:, t])
        return self._hs[:, 1:] if self.return_sequences else self._hs[:, -1]

    def backward(self, grad):
        W, U = self.params["W"], self.params["U"]
        x, hs = self._x, self._hs
        batch, steps, _ = x.shape
        dW = np.zeros_like(W)
        dU = np.zeros_like(U)
        db = np.zeros_like(self.params["b"])
        dx = np.zeros_like(x)
        dh = np.zeros((batch, self.hidden))
        for t in reversed(range(steps)):
            dh = dh + (grad[:, t] if self.return_sequences
                       else (grad if t == steps - 1 else 0.0))
            dz = dh * self._act_grad(hs[:, t + 1])
            dW += x[:, t].T @ dz
            dU += hs[:, t].T @ dz
            db += dz.sum(axis=0)
            dx[:, t] = dz @ W.T
            dh = dz @ U.T
        self.grads = {"W": dW, "U": dU, "b": db}
        return dx

    def describe(self):
        return {"kind": "simple_rnn", "n_in": self.n_in, "hidden": self.hidden,
                "activation": self.activation,
                "return_sequences": self.return_sequences}


class LSTM(Layer):
    """Standard four-gate LSTM; output h_t = o_t * tanh(c_t)."""

    def __init__(self, n_in: int, hidden: int, rng: np.random.Generator,
                 return_sequences: bool = False):
        super().__init__()
        self.n_in, self.hidden = n_in, hidden
        self.return_sequences = return_sequences
        self.params = {"W": uniform_init((n_in, 4 * hidden), rng),
                       "U": uniform_init((hidden, 4 * hidden), rng),
                       "b": np.zeros(4 * hidden)}

    def step(self, h_prev: np.ndarray, c_prev: np.ndarray, x_t: np.ndarray,
             ) -> tuple[np.ndarray, np.ndarray]:
        h_new, c_new, _ = self._step_cached(h_prev, c_prev, x_t)
        return h_new, c_new

    def _step_cached(self, h_prev, c_prev, x_t):
        H = self.hidden
        z = x_t @ self.params["W"] + h_prev @ self.params["U"] + self.params["b"]
        i = sigmoid(z[:, :H])
        f = sigmoid(z[:, H:2 * H])
        g = np.tanh(z[:, 2 * H:3 * H])
        o = sigmoid(z[:, 3 * H:])
        c_new = f * c_prev + i * g
        tanh_c = np.tanh(c_new)
        h_new = o * tanh_c
        return h_new, c_new, (i, f, g, o, c_prev, tanh_c)

    def forward(self, x, train=False):
        if x.shape[1] == 0:
            raise ValueError("empty sequence")
        batch, steps, _ = x.shape
        self._x = x
        self._hs = np.zeros((batch, steps + 1, self.hidden))
        c = np.zeros((batch, self.hidden))
        self._caches = []
        for t in range(steps):
            h, c, cache = self._step_cached(self._hs[:, t], c, x[:, t])
            self._hs[:, t + 1] = h
            self._caches.append(cache)
        return self._hs[:, 1:] if self.return_sequences else self._hs[:, -1]

    def backward(self, grad):
        H = self.hidden
        W, U = self.params["W"], self.params["U"]
        x, hs = self._x, self._hs
        batch, steps, _ = x.shape
        dW = np.zeros_like(W)
        dU = np.zeros_like(U)
        db = np.zeros_like(self.params["b"])
        dx = np.zeros_like(x)
        dh = np.zeros((batch, H))
        dc = np.zeros((batch, H))
        for t in reversed(range(steps)):
            dh = dh + (grad[:, t] if self.return_sequences
                       else (grad if t == steps - 1 else 0.0))
            i, f, g, o, c_prev, tanh_c = self._caches[t]
            do = dh * tanh_c
            dc = dc + dh * o * (1.0 - tanh_c * tanh_c)
            di, df, dg = dc * g, dc * c_prev, dc * i
            dz = np.concatenate([
                di * i * (1.0 - i),
                df * f * (1.0 - f),
                dg * (1.0 - g * g),
                do * o * (1.0 - o),
            ], axis=1)
            dW += x[:, t].T @ dz
            dU += hs[:, t].T @ dz
            db += dz.sum(axis=0)
            dx[:, t] = dz @ W.T
            dh = dz @ U.T
            dc = dc * f
        self.grads = {"W": dW, "U": dU, "b": db}
        return dx

    def describe(self):
        return {"kind": "lstm", "n_in": self.n_in, "hidden": self.hidden,
                "return_sequences": self.return_sequences}


class GRU(Layer):
    """Gated recurrent unit: h_t = (1 - z_t) * h_{t-1} + z_t * h~_t."""

    def __init__(self, n_in: int, hidden: int, rng: np.random.Generator,
                 return_sequences: bool = False):
        super().__init__()
        self.n_in, self.hidden = n_in, hidden
        self.return_sequences = return_sequences
        self.params = {"W": uniform_init((n_in, 3 * hidden), rng),
                       "U": uniform_init((hidden, 3 * hidden), rng),
                       "b": np.zeros(3 * hidden)}

    def step(self, h_prev: np.ndarray, x_t: np.ndarray) -> np.ndarray:
        return self._step_cached(h_prev, x_t)[0]

    def _step_cached(self, h_prev, x_t):
        H = self.hidden
        zw = x_t @ self.params["W"] + self.params["b"]
        zu = h_prev @ self.params["U"]
        z = sigmoid(zw[:, :H] + zu[:, :H])
        r = sigmoid(zw[:, H:2 * H] + zu[:, H:2 * H])
        rh = r * h_prev
        cand = np.tanh(zw[:, 2 * H:] + rh @ self.params["U"][:, 2 * H:])
        h_new = (1.0 - z) * h_prev + z * cand
        return h_new, (z, r, cand, rh)

    def forward(self, x, train=False):
        if x.shape[1] == 0:
            raise ValueError("empty sequence")
        batch, steps, _ = x.shape
        self._x = x
        self._hs = np.zeros((batch, steps + 1, self.hidden))
        self._caches = []
        for t in range(steps):
            h, cache = self._step_cached(self._hs[:, t], x[:, t])
            self._hs[:, t + 1] = h
            self._caches.append(cache)
        return self._hs[:, 1:] if self.return_sequences else self._hs[:, -1]

    def backward(self, grad):
        H = self.hidden
        W, U = self.params["W"], self.params["U"]
        x, hs = self._x, self._hs
        batch, steps, _ = x.shape
        dW = np.zeros_like(W)
        dU = np.zeros_like(U)
        db = np.zeros_like(self.params["b"])
        dx = np.zeros_like(x)
        dh = np.zeros((batch, H))
        for t in reversed(range(steps)):
            dh = dh + (grad[:, t] if self.return_sequences
                       else (grad if t == steps - 1 else 0.0))
            z, r, cand, rh = self._caches[t]
            h_prev = hs[:, t]
            dz_gate = dh * (cand - h_prev)
            dcand = dh * z
            dh_prev = dh * (1.0 - z)
            dcand_pre = dcand * (1.0 - cand * cand)
            drh = dcand_pre @ U[:, 2 * H:].T
            dr = drh * h_prev
            dh_prev += drh * r
            dz_pre = dz_gate * z * (1.0 - z)
            dr_pre = dr * r * (1.0 - r)
            dzr_pre = np.concatenate([dz_pre, dr_pre], axis=1)
            dW[:, :2 * H] += x[:, t].T @ dzr_pre
            dW[:, 2 * H:] += x[:, t].T @ dcand_pre
            dU[:, :2 * H] += h_prev.T @ dzr_pre
            dU[:, 2 * H:] += rh.T @ dcand_pre
            db[:2 * H] += dzr_pre.sum(axis=0)
            db[2 * H:] += dcand_pre.sum(axis=0)
            dx[:, t] = dzr_pre @ W[:, :2 * H].T + dcand_pre @ W[:, 2 * H:].T
            dh = dh_prev + dzr_pre @ U[:, :2 * H].T
        self.grads = {"W": dW, "U": dU, "b": db}
        return dx

    def describe(self):
        return {"kind": "gru", "n_in": self.n_in, "hidden": self.hidden,
                "return_sequences": self.return_sequences}


class Bidirectional(Layer):
    """Run one cell left-to-right and a twin right-to-left, concatenate states.

    Output step t holds the forward state after x_1..x_t next to the backward
    state after x_T..x_t, so the width doubles.  Always returns sequences.
    """

    def __init__(self, forward_cell: Layer, backward_cell: Layer):
        super().__init__()
        if forward_cell.hidden != backward_cell.hidden:
            raise ConfigError("both directions must share the hidden size")
        forward_cell.return_sequences = True
        backward_cell.return_sequences = True
        self.fwd = forward_cell
        self.bwd = backward_cell

    @property
    def hidden(self) -> int:
        return self.fwd.hidden

    def forward(self, x, train=False):
        if x.shape[1] == 0:
            raise ValueError("empty sequence")
        out_f = self.fwd.forward(x, train=train)
        out_b = self.bwd.forward(x[:, ::-1], train=train)[:, ::-1]
        return np.concatenate([out_f, out_b], axis=2)

    def backward(self, grad):
        H = self.fwd.hidden
        dx_f = self.fwd.backward(grad[:, :, :H])
        dx_b = self.bwd.backward(grad[:, ::-1, H:])[:, ::-1]
        return dx_f + dx_b

    @property
    def params(self):  # type: ignore[override]
        merged = {f"fwd.{k}": v for k, v in self.fwd.params.items()}
        merged.update({f"bwd.{k}": v for k, v in self.bwd.params.items()})
        return merged

    @params.setter
    def params(self, value):
        if value:  # base-class __init__ assigns an empty dict; ignore it
            raise AttributeError("set parameters on the wrapped cells")

    @property
    def grads(self):  # type: ignore[override]
        merged = {f"fwd.{k}": v for k, v in self.fwd.grads.items()}
        merged.update({f"bwd.{k}": v for k, v in self.bwd.grads.items()})
        return merged

    @grads.setter
    def grads(self, value):
        if value:
            raise AttributeError("gradients live on the wrapped cells")

    def describe(self):
        return {"kind": "bidirectional", "forward": self.fwd.describe(),
                "backward": self.bwd.describe()}
