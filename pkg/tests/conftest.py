import numpy as np
import pytest

from rumor_ts import Conversation


def make_conv(reactions, source=1000, label=0, cid="c1", event="e1"):
    return Conversation(id=cid, event=event, label=label, source_time=source,
                        reaction_times=tuple(reactions))


def bucket_by_scan(source, reactions, t):
    """Independent vectorization oracle: linear scan per reaction."""
    kept = [x for x in reactions if x > source]
    if not kept:
        return []
    n = 0
    while source + n * t < max(kept):
        n += 1
    counts = [0] * n
    for x in kept:
        for k in range(1, n + 1):
            a = source + (k - 1) * t
            b = source + k * t
            if a < x <= b:
                counts[k - 1] += 1
                break
    return counts


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
