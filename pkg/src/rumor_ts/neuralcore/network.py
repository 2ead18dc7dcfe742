"""Sequential layer container plus parameter checkpoint serialization."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .layers import Dropout, Layer

CHECKPOINT_VERSION = 1


class Network:
    """A straight stack of layers sharing one forward/backward interface."""

    def __init__(self, layers: list[Layer]):
        self.layers = list(layers)

    def forward(self, x: np.ndarray, train: bool = False) -> np.ndarray:
        for layer in self.layers:
            x = layer.forward(x, train=train)
        return x

    def backward(self, grad: np.ndarray) -> np.ndarray:
        for layer in reversed(self.layers):
            grad = layer.backward(grad)
        return grad

    def params(self) -> dict[str, np.ndarray]:
        flat = {}
        for i, layer in enumerate(self.layers):
            for name, arr in layer.params.items():
                flat[f"{i}.{name}"] = arr
        return flat

    def grads(self) -> dict[str, np.ndarray]:
        flat = {}
        for i, layer in enumerate(self.layers):
            for name, arr in layer.grads.items():
                flat[f"{i}.{name}"] = arr
        return flat

    def n_params(self) -> int:
        return sum(arr.size for arr in self.params().values())

    def freeze_dropout(self) -> None:
        for layer in self.layers:
            if isinstance(layer, Dropout):
                layer.freeze()

    def unfreeze_dropout(self) -> None:
        for layer in self.layers:
            if isinstance(layer, Dropout):
                layer.unfreeze()

    def describe(self) -> list[dict]:
        return [layer.describe() for layer in self.layers]

    def save_checkpoint(self, path: str | Path, manifest_extra: dict | None = None) -> None:
        """Versioned .npz of all parameters plus a JSON layer manifest."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        arrays = {k.replace(".", "__"): v for k, v in self.params().items()}
        np.savez_compressed(path, **arrays)
        manifest = {
            "version": CHECKPOINT_VERSION,
            "layers": self.describe(),
            "param_keys": sorted(self.params().keys()),
        }
        if manifest_extra:
            manifest.update(manifest_extra)
        path.with_suffix(".json").write_text(
            json.dumps(manifest, indent=2), encoding="utf-8")

    def load_checkpoint(self, path: str | Path) -> None:
        """Restore parameter values into the existing (matching) topology."""
        with np.load(Path(path)) as blob:
            stored = {k.replace("__", "."): blob[k] for k in blob.files}
        own = self.params()
        if set(stored) != set(own):
            raise ValueError("checkpoint does not match network topology")
        for key, value in stored.items():
            if own[key].shape != value.shape:
                raise ValueError(f"checkpoint shape mismatch for {key}")
            own[key][...] = value
