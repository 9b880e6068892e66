"""Confusion counts and one-vs-rest TP/TN/FP/FN tallies."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import DataError
from .labels import ClassLabel

CLASSES = tuple(ClassLabel)


@dataclass(frozen=True)
class OneVsRest:
    tp: int
    tn: int
    fp: int
    fn: int


@dataclass(frozen=True)
class ConfusionCounts:
    matrix: np.ndarray  # rows: truth, columns: prediction, indexed by class code

    @property
    def total(self) -> int:
        return int(self.matrix.sum())

    @property
    def accuracy(self) -> float:
        return float(np.trace(self.matrix)) / self.total if self.total else 0.0

    def one_vs_rest(self, label: ClassLabel) -> OneVsRest:
        k = int(label)
        tp = int(self.matrix[k, k])
        fn = int(self.matrix[k].sum()) - tp
        fp = int(self.matrix[:, k].sum()) - tp
        return OneVsRest(tp, self.total - tp - fn - fp, fp, fn)

    def to_dict(self) -> dict:
        return {
            "classes": [c.display for c in CLASSES],
            "matrix": self.matrix.tolist(),
            "total": self.total,
            "accuracy": self.accuracy,
            "per_class": {
                c.display: vars(self.one_vs_rest(c)) for c in CLASSES
            },
        }


def confusion_counts(truth: Mapping[str, object], predicted: Mapping[str, object]) -> ConfusionCounts:
    """Tally predictions against truth, both keyed by image id."""
    if set(truth) != set(predicted):
        missing = sorted(set(truth) - set(predicted))
        extra = sorted(set(predicted) - set(truth))
        raise DataError(f"id mismatch: missing predictions {missing[:5]}, unknown ids {extra[:5]}")
    m = np.zeros((len(CLASSES), len(CLASSES)), dtype=np.int64)
    for key in sorted(truth):
        m[int(ClassLabel.parse(truth[key])), int(ClassLabel.parse(predicted[key]))] += 1
    return ConfusionCounts(m)
