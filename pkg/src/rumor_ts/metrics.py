"""Precision/recall/F1 under micro and macro averaging.

Macro averaging takes the unweighted mean of per-class precision and recall
first and combines those means harmonically; this is not the same number as
averaging per-class F1 scores.  Micro averaging sums TP/FP/FN over classes
before forming the ratios, which for single-label prediction collapses to
plain accuracy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ConfusionCounts:
    classes: tuple[int, ...]
    tp: dict[int, int]
    fp: dict[int, int]
    fn: dict[int, int]
    tn: dict[int, int]

    def to_dict(self) -> dict:
        return {
            str(c): {"tp": self.tp[c], "fp": self.fp[c],
                     "fn": self.fn[c], "tn": self.tn[c]}
            for c in self.classes
        }


def confusion(labels, predictions, classes: tuple[int, ...] = (0, 1)) -> ConfusionCounts:
    """Per-class confusion counts over one prediction set."""
    labels = np.asarray(labels)
    predictions = np.asarray(predictions)
    if labels.shape != predictions.shape:
        raise ValueError(
            f"labels and predictions differ in length: {labels.shape} vs {predictions.shape}")
    tp, fp, fn, tn = {}, {}, {}, {}
    for c in classes:
        is_c = labels == c
        said_c = predictions == c
        tp[c] = int(np.sum(is_c & said_c))
        fp[c] = int(np.sum(~is_c & said_c))
        fn[c] = int(np.sum(is_c & ~said_c))
        tn[c] = int(np.sum(~is_c & ~said_c))
    return ConfusionCounts(classes=tuple(classes), tp=tp, fp=fp, fn=fn, tn=tn)


def _ratio(num: float, denom: float) -> float:
    return num / denom if denom > 0 else 0.0


def macro_f1(counts: ConfusionCounts) -> tuple[float, float, float]:
    """(precision, recall, F1) with per-class scores averaged unweighted."""
    precisions = [_ratio(counts.tp[c], counts.tp[c] + counts.fp[c])
                  for c in counts.classes]
    recalls = [_ratio(counts.tp[c], counts.tp[c] + counts.fn[c])
               for c in counts.classes]
    p = sum(precisions) / len(counts.classes)
    r = sum(recalls) / len(counts.classes)
    f1 = _ratio(2.0 * p * r, p + r)
    return p, r, f1


def micro_f1(counts: ConfusionCounts) -> tuple[float, float, float]:
    """(precision, recall, F1) from globally summed TP/FP/FN."""
    tp = sum(counts.tp.values())
    fp = sum(counts.fp.values())
    fn = sum(counts.fn.values())
    p = _ratio(tp, tp + fp)
    r = _ratio(tp, tp + fn)
    f1 = _ratio(2.0 * p * r, p + r)
    return p, r, f1
