"""Seeded synthetic corpora with controllable rumor/non-rumor separation.

Rumor conversations get an early burst of reactions (exponential
inter-arrival times with a short mean gap); non-rumors spread the same number
of reactions near-uniformly over a much longer horizon.  Widening the gap
between ``burst_mean_gap`` and ``horizon_seconds`` makes the two classes
easier to tell apart from the first few interval counts alone.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .ingest import Conversation, RawDataset, format_timestamp

_BASE_TIME = 1420070400  # 2015-01-01 00:00:00 UTC, a plausible corpus epoch


def generate_synthetic_corpus(n_events: int = 3,
                              conversations_per_event: int = 120,
                              seed: int = 0,
                              burst_mean_gap: float = 15.0,
                              horizon_seconds: int = 10800,
                              reactions_low: int = 20,
                              reactions_high: int = 45) -> RawDataset:
    """Build a deterministic corpus; half of each event's conversations are rumors."""
    rng = np.random.default_rng(seed)
    conversations = []
    events = [f"event{501 + i}" for i in range(n_events)]
    for ei, event in enumerate(events):
        n_rumors = conversations_per_event // 2
        source_base = _BASE_TIME + ei * 30 * 86400
        for j in range(conversations_per_event):
            label = 1 if j < n_rumors else 0
            source_time = source_base + int(rng.integers(0, 86400))
            n_reactions = int(rng.integers(reactions_low, reactions_high + 1))
            if label == 1:
                gaps = rng.exponential(burst_mean_gap, size=n_reactions)
                offsets = np.maximum(1, np.ceil(np.cumsum(gaps))).astype(np.int64)
            else:
                offsets = rng.integers(1, horizon_seconds + 1, size=n_reactions)
            times = tuple(sorted(int(source_time + d) for d in offsets))
            conversations.append(Conversation(
                id=f"{event}-c{j:04d}",
                event=event,
                label=label,
                source_time=source_time,
                reaction_times=times,
            ))
    conversations.sort(key=lambda c: (c.event, c.id))
    return RawDataset(conversations=tuple(conversations), events=tuple(events))


def write_corpus_tree(raw: RawDataset, root: str | Path) -> Path:
    """Materialize a dataset in the on-disk conversation layout."""
    root = Path(root)
    for conv in raw.conversations:
        branch = "rumours" if conv.label == 1 else "non-rumours"
        conv_dir = root / conv.event / branch / conv.id
        source_dir = conv_dir / "source-tweets"
        reactions_dir = conv_dir / "reactions"
        source_dir.mkdir(parents=True, exist_ok=True)
        reactions_dir.mkdir(parents=True, exist_ok=True)
        (source_dir / f"{conv.id}.json").write_text(json.dumps({
            "id_str": conv.id,
            "created_at": format_timestamp(conv.source_time),
        }), encoding="utf-8")
        for k, t in enumerate(conv.reaction_times):
            (reactions_dir / f"{conv.id}-r{k:04d}.json").write_text(json.dumps({
                "id_str": f"{conv.id}-r{k:04d}",
                "created_at": format_timestamp(t),
            }), encoding="utf-8")
    return root
