"""Macro-averaged precision, recall and F1 for binary labels.

Class 1 (minority) is the positive class of the confusion matrix; the macro
scores average the per-class values of both classes with equal weight.  Any
ratio with a zero denominator counts as 0.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import EmptyMatrix, LengthMismatch

#: probabilities strictly above this are predicted as the minority class
DECISION_THRESHOLD = 0.5


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def swapped(self) -> "ConfusionMatrix":
        """The same counts with class 0 treated as positive."""
        return ConfusionMatrix(tp=self.tn, fp=self.fn, tn=self.tp, fn=self.fp)


@dataclass(frozen=True)
class MacroScores:
    precision: float
    recall: float
    f1: float

    def to_dict(self) -> dict:
        return asdict(self)


def confusion(y_true, y_pred) -> ConfusionMatrix:
    t = np.asarray(y_true).reshape(-1)
    p = np.asarray(y_pred).reshape(-1)
    if t.shape != p.shape:
        raise LengthMismatch(f"{t.size} true labels vs {p.size} predictions")
    if t.size == 0:
        raise LengthMismatch("empty label lists")
    t1, p1 = t == 1, p == 1
    return ConfusionMatrix(
        tp=int(np.sum(t1 & p1)),
        fp=int(np.sum(~t1 & p1)),
        tn=int(np.sum(~t1 & ~p1)),
        fn=int(np.sum(t1 & ~p1)),
    )


def _ratio(num: float, den: float) -> float:
    return num / den if den > 0 else 0.0


def per_class(cm: ConfusionMatrix) -> tuple[tuple[float, float, float], tuple[float, float, float]]:
    """(precision, recall, f1) for class 0 and for class 1."""
    out = []
    for tp, fp, fn in ((cm.tn, cm.fn, cm.fp), (cm.tp, cm.fp, cm.fn)):
        p = _ratio(tp, tp + fp)
        r = _ratio(tp, tp + fn)
        out.append((p, r, _ratio(2 * p * r, p + r)))
    return out[0], out[1]


def macro_scores(cm: ConfusionMatrix) -> MacroScores:
    if cm.total <= 0:
        raise EmptyMatrix("confusion matrix has no samples")
    c0, c1 = per_class(cm)
    return MacroScores(
        precision=(c0[0] + c1[0]) / 2.0,
        recall=(c0[1] + c1[1]) / 2.0,
        f1=(c0[2] + c1[2]) / 2.0,
    )


def predict_labels(proba) -> np.ndarray:
    return (np.asarray(proba) > DECISION_THRESHOLD).astype(np.int64)


def macro_f1(y_true, y_pred) -> float:
    return macro_scores(confusion(y_true, y_pred)).f1


def mean_scores(scores) -> MacroScores:
    scores = list(scores)
    return MacroScores(
        precision=float(np.mean([s.precision for s in scores])),
        recall=float(np.mean([s.recall for s in scores])),
        f1=float(np.mean([s.f1 for s in scores])),
    )
