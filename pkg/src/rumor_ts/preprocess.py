"""Feature pipeline applied after vectorization.

Order is fixed: truncated SVD, then min-max scaling, then removal of
cross-label duplicate rows, then balanced class weights.  The SVD and scaler
are fitted on training rows only and reused unchanged on held-out rows.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .errors import ConfigError, DataError
from .timeseries import TimeSeriesDataset

PREPROCESS_BLOB_VERSION = 1


def _checked(X) -> np.ndarray:
    arr = np.asarray(X, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise DataError("input matrix contains non-finite values")
    return check_array(arr, dtype=np.float64)


class TruncatedSVD(BaseEstimator, TransformerMixin):
    """Projection onto the top-``rank`` right-singular subspace, uncentered.

    Computed exactly through the symmetric eigendecomposition of the Gram
    matrix ``X.T @ X`` (columns never exceed a few thousand here), which is
    deterministic and accurate to machine precision at this scale.  Component
    signs are fixed so the largest-magnitude entry of each row is positive.
    """

    def __init__(self, rank: int = 32):
        self.rank = rank

    def fit(self, X, y=None) -> "TruncatedSVD":
        X = _checked(X)
        n, m = X.shape
        limit = min(n, m) - 1
        if not 1 <= self.rank <= limit:
            raise ConfigError(
                f"svd rank must be in 1..{limit} for a {n}x{m} matrix, got {self.rank}"
            )
        gram = X.T @ X
        eigvals, eigvecs = np.linalg.eigh(gram)
        order = np.argsort(eigvals)[::-1][: self.rank]
        components = eigvecs[:, order].T
        # Resolve the per-vector sign ambiguity deterministically.
        flip = components[np.arange(self.rank), np.argmax(np.abs(components), axis=1)] < 0
        components[flip] *= -1.0
        self.components_ = np.ascontiguousarray(components)
        self.singular_values_ = np.sqrt(np.clip(eigvals[order], 0.0, None))
        self.n_features_in_ = m
        return self

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "components_")
        X = _checked(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"matrix has {X.shape[1]} columns, fitted on {self.n_features_in_}"
            )
        return X @ self.components_.T


class MinMaxScaler(BaseEstimator, TransformerMixin):
    """Map each fitted dimension linearly onto [0, 1].

    Constant dimensions map to 0.  Held-out values are not clipped, so they
    may land outside [0, 1].
    """

    def fit(self, X, y=None) -> "MinMaxScaler":
        X = _checked(X)
        self.data_min_ = X.min(axis=0)
        self.data_max_ = X.max(axis=0)
        span = self.data_max_ - self.data_min_
        self.scale_ = np.where(span == 0.0, 1.0, span)
        return self

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "scale_")
        X = _checked(X)
        if X.shape[1] != len(self.scale_):
            raise ValueError(
                f"matrix has {X.shape[1]} columns, fitted on {len(self.scale_)}"
            )
        return (X - self.data_min_) / self.scale_


def remove_conflicting_duplicates(ds: TimeSeriesDataset) -> TimeSeriesDataset:
    """Drop every row whose exact feature vector occurs under both labels.

    Same-label exact duplicates survive; survivor order is preserved.
    Idempotent by construction.
    """
    groups: dict[bytes, set[int]] = {}
    keys = [np.ascontiguousarray(row).tobytes() for row in ds.matrix]
    for key, label in zip(keys, ds.labels):
        groups.setdefault(key, set()).add(int(label))
    keep = np.array([len(groups[key]) == 1 for key in keys], dtype=bool)
    if keep.all():
        return ds
    return ds.select(keep)


def class_weights(labels: np.ndarray) -> dict[int, float]:
    """Balanced per-class loss weights: n_samples / (n_classes * count(c))."""
    labels = np.asarray(labels)
    classes, counts = np.unique(labels, return_counts=True)
    if len(classes) < 2:
        raise ConfigError(
            f"class weights need both classes present, got only {classes.tolist()}"
        )
    n = len(labels)
    return {int(c): n / (len(classes) * int(k)) for c, k in zip(classes, counts)}


def save_models(svd: TruncatedSVD, scaler: MinMaxScaler, path: str | Path) -> None:
    """Versioned binary blob plus a JSON sidecar for human inspection."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savez_compressed(
        path,
        version=np.array([PREPROCESS_BLOB_VERSION]),
        components=svd.components_,
        singular_values=svd.singular_values_,
        data_min=scaler.data_min_,
        data_max=scaler.data_max_,
    )
    sidecar = {
        "version": PREPROCESS_BLOB_VERSION,
        "rank": int(svd.components_.shape[0]),
        "input_width": int(svd.n_features_in_),
        "singular_values": [float(s) for s in svd.singular_values_],
        "scaler_min": [float(v) for v in scaler.data_min_],
        "scaler_max": [float(v) for v in scaler.data_max_],
    }
    path.with_suffix(".json").write_text(json.dumps(sidecar, indent=2), encoding="utf-8")


def load_models(path: str | Path) -> tuple[TruncatedSVD, MinMaxScaler]:
    path = Path(path)
    with np.load(path) as blob:
        version = int(blob["version"][0])
        if version != PREPROCESS_BLOB_VERSION:
            raise DataError(f"unsupported preprocess blob version {version}")
        svd = TruncatedSVD(rank=blob["components"].shape[0])
        svd.components_ = blob["components"]
        svd.singular_values_ = blob["singular_values"]
        svd.n_features_in_ = blob["components"].shape[1]
        scaler = MinMaxScaler()
        scaler.data_min_ = blob["data_min"]
        scaler.data_max_ = blob["data_max"]
        span = scaler.data_max_ - scaler.data_min_
        scaler.scale_ = np.where(span == 0.0, 1.0, span)
    return svd, scaler
