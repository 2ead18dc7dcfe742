"""Turn conversations into fixed-width reaction-count vectors.

A conversation with source time ``s`` and reactions ``r_1..r_n`` is cut into
consecutive intervals of width ``T`` seconds starting at ``s``.  Interval
``k`` covers ``(s + (k-1)T, s + kT]`` and its feature value is the number of
reactions falling inside.  The vector length is ``ceil((max(r) - s) / T)``,
zero when there are no reactions; a whole dataset is right-padded with zeros
to the longest vector.
"""

from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .errors import ConfigError, DataError
from .ingest import Conversation, RawDataset

CANONICAL_INTERVAL_MINUTES = (2, 5, 10, 30, 60)


@dataclass(frozen=True)
class IntervalConfig:
    """Bucket width ``T``, stored in seconds to keep the arithmetic integral."""

    interval_seconds: int

    def __post_init__(self) -> None:
        if self.interval_seconds <= 0:
            raise ConfigError(f"interval must be positive, got {self.interval_seconds}")

    @classmethod
    def from_minutes(cls, minutes: int) -> "IntervalConfig":
        return cls(interval_seconds=int(minutes) * 60)


@dataclass
class TimeSeriesDataset:
    """Padded count matrix with per-row label, event and conversation id.

    ``matrix`` holds raw non-negative integer counts straight after
    vectorization and real values after dimensionality reduction or scaling.
    """

    matrix: np.ndarray
    labels: np.ndarray
    events: tuple[str, ...]
    ids: tuple[str, ...]

    def __post_init__(self) -> None:
        self.matrix = np.asarray(self.matrix, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.matrix.ndim != 2:
            raise ValueError("matrix must be two-dimensional")
        n = self.matrix.shape[0]
        if not (len(self.labels) == len(self.events) == len(self.ids) == n):
            raise ValueError("matrix rows, labels, events and ids must have equal length")

    @property
    def n_samples(self) -> int:
        return self.matrix.shape[0]

    @property
    def seq_len(self) -> int:
        return self.matrix.shape[1]

    def select(self, mask: np.ndarray) -> "TimeSeriesDataset":
        """Row subset preserving order; ``mask`` is boolean or an index array."""
        mask = np.asarray(mask)
        idx = np.flatnonzero(mask) if mask.dtype == bool else mask
        return TimeSeriesDataset(
            matrix=self.matrix[idx],
            labels=self.labels[idx],
            events=tuple(self.events[i] for i in idx),
            ids=tuple(self.ids[i] for i in idx),
        )

    def replace_matrix(self, matrix: np.ndarray) -> "TimeSeriesDataset":
        """Same rows, new feature columns (after a transform step)."""
        return TimeSeriesDataset(matrix=matrix, labels=self.labels,
                                 events=self.events, ids=self.ids)


def conversation_length(conv: Conversation, cfg: IntervalConfig) -> int:
    """Number of ``T``-wide intervals needed to cover all reactions.

    Zero for a reaction-free conversation.  Uses integer ceiling division,
    so a reaction exactly on an interval boundary does not open a new one.
    """
    if not conv.reaction_times:
        return 0
    span = max(conv.reaction_times) - conv.source_time
    if span <= 0:
        return 0
    return -(-span // cfg.interval_seconds)


def interval_count(conv: Conversation, cfg: IntervalConfig, k: int) -> int:
    """Reactions in interval ``k`` (1-based), i.e. in ``(a, b]`` with
    ``a = source + (k-1)T`` and ``b = source + kT``.

    A reaction at the source instant falls in no interval.
    """
    n = conversation_length(conv, cfg)
    if not 1 <= k <= n:
        raise IndexError(f"interval index {k} out of range 1..{n}")
    a = conv.source_time + (k - 1) * cfg.interval_seconds
    b = conv.source_time + k * cfg.interval_seconds
    return sum(1 for x in conv.reaction_times if a < x <= b)


def vectorize(conv: Conversation, cfg: IntervalConfig) -> np.ndarray:
    """Full count vector of length ``conversation_length(conv, cfg)``."""
    n = conversation_length(conv, cfg)
    counts = np.zeros(n, dtype=np.int64)
    if n == 0:
        return counts
    t = cfg.interval_seconds
    offsets = np.asarray(conv.reaction_times, dtype=np.int64) - conv.source_time
    offsets = offsets[offsets > 0]
    buckets = (offsets - 1) // t  # 0-based interval index
    np.add.at(counts, buckets, 1)
    return counts


class ReactionCountVectorizer(BaseEstimator, TransformerMixin):
    """Fit learns the padded width over a corpus; transform builds count rows.

    The width is taken over every conversation seen at fit time, so fitting on
    the full corpus before any train/test split gives all splits a common
    feature length.
    """

    def __init__(self, interval_seconds: int = 3600):
        self.interval_seconds = interval_seconds

    def fit(self, conversations: list[Conversation], y=None) -> "ReactionCountVectorizer":
        cfg = IntervalConfig(self.interval_seconds)
        conversations = list(conversations)
        if not conversations:
            raise DataError("cannot fit on an empty conversation list")
        self.seq_len_ = max(conversation_length(c, cfg) for c in conversations)
        if self.seq_len_ == 0:
            raise DataError("degenerate dataset: no conversation has any reaction")
        return self

    def transform(self, conversations: list[Conversation]) -> np.ndarray:
        cfg = IntervalConfig(self.interval_seconds)
        rows = np.zeros((len(conversations), self.seq_len_), dtype=np.float64)
        for i, conv in enumerate(conversations):
            v = vectorize(conv, cfg)
            if len(v) > self.seq_len_:
                raise ValueError(
                    f"conversation {conv.id} needs {len(v)} intervals, "
                    f"fitted width is {self.seq_len_}"
                )
            rows[i, :len(v)] = v
        return rows


def build_matrix(conversations: list[Conversation] | tuple[Conversation, ...],
                 cfg: IntervalConfig) -> TimeSeriesDataset:
    """Vectorize a corpus and right-pad every row to the longest vector."""
    conversations = list(conversations)
    if not conversations:
        raise DataError("cannot build a matrix from zero conversations")
    vec = ReactionCountVectorizer(interval_seconds=cfg.interval_seconds).fit(conversations)
    return TimeSeriesDataset(
        matrix=vec.transform(conversations),
        labels=np.array([c.label for c in conversations], dtype=np.int64),
        events=tuple(c.event for c in conversations),
        ids=tuple(c.id for c in conversations),
    )


def dataset_fingerprint(raw: RawDataset) -> str:
    """Content hash of a raw dataset, used to key vectorization caches."""
    digest = hashlib.sha256()
    for conv in raw.conversations:
        digest.update(conv.id.encode())
        digest.update(conv.event.encode())
        digest.update(str(conv.label).encode())
        digest.update(str(conv.source_time).encode())
        digest.update(",".join(map(str, conv.reaction_times)).encode())
    return digest.hexdigest()[:16]


def _format_value(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def save_csv(ds: TimeSeriesDataset, path: str | Path) -> None:
    """Columnar text form: id, event, label, v1..v_seq_len."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "event", "label"] + [f"v{j + 1}" for j in range(ds.seq_len)])
        for i in range(ds.n_samples):
            writer.writerow([ds.ids[i], ds.events[i], int(ds.labels[i])]
                            + [_format_value(v) for v in ds.matrix[i]])


def load_csv(path: str | Path) -> TimeSeriesDataset:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        width = len(header) - 3
        ids, events, labels, rows = [], [], [], []
        for record in reader:
            ids.append(record[0])
            events.append(record[1])
            labels.append(int(record[2]))
            rows.append([float(x) for x in record[3:]])
    matrix = np.array(rows, dtype=np.float64).reshape(len(rows), width)
    return TimeSeriesDataset(matrix=matrix, labels=np.array(labels, dtype=np.int64),
                             events=tuple(events), ids=tuple(ids))


def cache_path(cache_dir: str | Path, fingerprint: str, cfg: IntervalConfig) -> Path:
    return Path(cache_dir) / f"counts_{fingerprint}_T{cfg.interval_seconds}.npz"


def save_cache(ds: TimeSeriesDataset, cache_dir: str | Path,
               fingerprint: str, cfg: IntervalConfig) -> Path:
    path = cache_path(cache_dir, fingerprint, cfg)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savez_compressed(
        path,
        matrix=ds.matrix,
        labels=ds.labels,
        events=np.array(ds.events, dtype=object),
        ids=np.array(ds.ids, dtype=object),
    )
    return path


def load_cache(cache_dir: str | Path, fingerprint: str,
               cfg: IntervalConfig) -> TimeSeriesDataset | None:
    path = cache_path(cache_dir, fingerprint, cfg)
    if not path.exists():
        return None
    with np.load(path, allow_pickle=True) as blob:
        return TimeSeriesDataset(
            matrix=blob["matrix"],
            labels=blob["labels"],
            events=tuple(blob["events"].tolist()),
            ids=tuple(blob["ids"].tolist()),
        )
