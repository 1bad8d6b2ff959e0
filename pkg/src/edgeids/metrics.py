"""Confusion matrices, threshold metrics and ROC analysis.

The positive class is always 1 (attack).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    tn: int
    fp: int
    fn: int

    def __post_init__(self):
        for name in ("tp", "tn", "fp", "fn"):
            v = getattr(self, name)
            if int(v) != v or v < 0:
                raise ValueError(f"{name} must be a non-negative count, got {v}")
            object.__setattr__(self, name, int(v))

    @property
    def total(self):
        return self.tp + self.tn + self.fp + self.fn

    def class_support(self):
        """``(benign, attack)`` counts of the evaluated ground truth."""
        return self.tn + self.fp, self.tp + self.fn

    def to_dict(self):
        return {"tp": self.tp, "tn": self.tn, "fp": self.fp, "fn": self.fn}


@dataclass(frozen=True)
class MetricReport:
    accuracy: float
    precision: float
    recall: float
    f1: float
    roc_auc: float = None
    zero_division_flags: frozenset = field(default_factory=frozenset)

    def with_auc(self, auc):
        return MetricReport(self.accuracy, self.precision, self.recall, self.f1,
                            float(auc), self.zero_division_flags)

    def to_dict(self):
        return {
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "roc_auc": self.roc_auc,
            "zero_division_flags": sorted(self.zero_division_flags),
        }


@dataclass(frozen=True, eq=False)
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray
    auc: float

    @property
    def points(self):
        return list(zip(self.fpr.tolist(), self.tpr.tolist()))

    def trapezoid_area(self):
        return float(np.trapezoid(self.tpr, self.fpr))

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["fpr", "tpr"])
        for x, y in self.points:
            w.writerow([repr(x), repr(y)])
        return buf.getvalue()


def _binary(v, name):
    v = np.asarray(v)
    if v.ndim != 1:
        raise ValueError(f"{name} must be a vector")
    if not np.all((v == 0) | (v == 1)):
        raise ValueError(f"{name} must contain only 0 and 1")
    return v.astype(np.int64)


def confusion(y_true, y_pred) -> ConfusionMatrix:
    y_true = _binary(y_true, "y_true")
    y_pred = _binary(y_pred, "y_pred")
    if y_true.shape != y_pred.shape:
        raise ValueError(f"length mismatch: {y_true.size} labels vs {y_pred.size} predictions")
    if y_true.size == 0:
        raise ValueError("cannot build a confusion matrix from zero instances")
    tp = int(np.sum((y_true == 1) & (y_pred == 1)))
    tn = int(np.sum((y_true == 0) & (y_pred == 0)))
    fp = int(np.sum((y_true == 0) & (y_pred == 1)))
    fn = int(np.sum((y_true == 1) & (y_pred == 0)))
    return ConfusionMatrix(tp, tn, fp, fn)


def metrics_from_confusion(cm: ConfusionMatrix) -> MetricReport:
    """Accuracy, precision, recall and F1 from a confusion matrix.

    A zero denominator yields 0 for that metric and records its name in
    ``zero_division_flags``; F1 is flagged when precision + recall is 0.
    F1 is evaluated as ``2 tp / (2 tp + fp + fn)``, algebraically the
    harmonic mean but a single rounding, so it never leaves the
    ``[min(P, R), max(P, R)]`` interval.
    """
    if cm.total == 0:
        raise ValueError("confusion matrix is empty")
    flags = set()

    def ratio(num, den, name):
        if den == 0:
            flags.add(name)
            return 0.0
        return num / den

    accuracy = (cm.tp + cm.tn) / cm.total
    precision = ratio(cm.tp, cm.tp + cm.fp, "precision")
    recall = ratio(cm.tp, cm.tp + cm.fn, "recall")
    if precision + recall == 0:
        flags.add("f1")
        f1 = 0.0
    else:
        f1 = 2 * cm.tp / (2 * cm.tp + cm.fp + cm.fn)
    return MetricReport(accuracy, precision, recall, f1, None, frozenset(flags))


def roc_auc(y_true, scores) -> RocCurve:
    """ROC curve and its area.

    The area is the Mann-Whitney statistic computed from average ranks, so
    a tied positive/negative pair counts one half. Curve points come from
    sweeping the distinct scores in descending order, starting at (0, 0).
    """
    y = _binary(y_true, "y_true")
    s = np.asarray(scores, dtype=np.float64)
    if s.shape != y.shape:
        raise ValueError(f"length mismatch: {y.size} labels vs {s.size} scores")
    n_pos = int(y.sum())
    n_neg = y.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("ROC AUC is undefined when only one class is present")

    ranks = rankdata(s)
    auc = (ranks[y == 1].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)

    order = np.argsort(-s, kind="stable")
    s_sorted, y_sorted = s[order], y[order]
    last_of_group = np.r_[s_sorted[1:] != s_sorted[:-1], True]
    tps = np.cumsum(y_sorted)[last_of_group]
    fps = np.cumsum(1 - y_sorted)[last_of_group]
    fpr = np.r_[0.0, fps / n_neg]
    tpr = np.r_[0.0, tps / n_pos]
    thresholds = np.r_[np.inf, s_sorted[last_of_group]]
    return RocCurve(fpr, tpr, thresholds, float(auc))


def error_profile(cm: ConfusionMatrix):
    """``(false positives, false negatives)``."""
    return cm.fp, cm.fn


def evaluate(y_true, y_pred, scores=None):
    """Confusion matrix, metric report (with AUC when scores are given) and curve."""
    cm = confusion(y_true, y_pred)
    report = metrics_from_confusion(cm)
    curve = None
    if scores is not None and 0 < int(np.sum(y_true)) < len(y_true):
        curve = roc_auc(y_true, scores)
        report = report.with_auc(curve.auc)
    return cm, report, curve
