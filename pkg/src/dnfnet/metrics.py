"""Classification metrics and explanation fidelity.

The positive class is 1 (malware) throughout. Zero-denominator ratios fall
back to 0 so every metric is total and NaN-free.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptyCounts, EmptyInput


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    precision: float
    recall: float
    fpr: float
    f1: float
    counts: ConfusionCounts

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "fpr": self.fpr,
            "f1": self.f1,
            "counts": {
                "tp": self.counts.tp,
                "fp": self.counts.fp,
                "tn": self.counts.tn,
                "fn": self.counts.fn,
            },
        }

    @classmethod
    def from_dict(cls, blob: dict) -> "MetricsReport":
        c = blob["counts"]
        return cls(
            accuracy=blob["accuracy"],
            precision=blob["precision"],
            recall=blob["recall"],
            fpr=blob["fpr"],
            f1=blob["f1"],
            counts=ConfusionCounts(c["tp"], c["fp"], c["tn"], c["fn"]),
        )

    def summary(self) -> str:
        return (
            f"accuracy={self.accuracy:.4f} precision={self.precision:.4f} "
            f"recall={self.recall:.4f} fpr={self.fpr:.4f} f1={self.f1:.4f}"
        )


def confusion(predictions, labels) -> ConfusionCounts:
    """Standard contingency counts with positive class 1."""
    preds = np.asarray(predictions, dtype=np.bool_)
    labs = np.asarray(labels, dtype=np.bool_)
    if preds.shape != labs.shape:
        raise DimensionMismatch(labs.shape, preds.shape)
    if preds.size == 0:
        raise EmptyInput("need at least one prediction")
    tp = int(np.count_nonzero(preds & labs))
    fp = int(np.count_nonzero(preds & ~labs))
    tn = int(np.count_nonzero(~preds & ~labs))
    fn = int(np.count_nonzero(~preds & labs))
    return ConfusionCounts(tp=tp, fp=fp, tn=tn, fn=fn)


def _ratio(num: int, den: int) -> float:
    return num / den if den > 0 else 0.0


def compute_metrics(counts: ConfusionCounts) -> MetricsReport:
    """Accuracy, precision, recall (TPR), FPR and F1 from confusion counts."""
    total = counts.total
    if total == 0:
        raise EmptyCounts("confusion counts are all zero")
    precision = _ratio(counts.tp, counts.tp + counts.fp)
    recall = _ratio(counts.tp, counts.tp + counts.fn)
    f1 = (
        2.0 * precision * recall / (precision + recall)
        if (precision + recall) > 0.0
        else 0.0
    )
    return MetricsReport(
        accuracy=(counts.tp + counts.tn) / total,
        precision=precision,
        recall=recall,
        fpr=_ratio(counts.fp, counts.fp + counts.tn),
        f1=f1,
        counts=counts,
    )


def fidelity(model_predictions, explanation_predictions) -> float:
    """Agreement rate between two prediction vectors; labels play no part."""
    a = np.asarray(model_predictions, dtype=np.bool_)
    b = np.asarray(explanation_predictions, dtype=np.bool_)
    if a.shape != b.shape:
        raise DimensionMismatch(a.shape, b.shape)
    if a.size == 0:
        raise EmptyInput("need at least one prediction")
    return float(np.count_nonzero(a == b)) / a.size
