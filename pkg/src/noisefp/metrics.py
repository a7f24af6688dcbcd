"""Accuracy, per-class precision/recall/F1 and confusion matrices."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import EmptyInputError, ShapeError


@dataclass
class ConfusionMatrix:
    """``counts[i, j]``: samples of true class i predicted as j."""

    counts: np.ndarray
    class_names: list

    @property
    def total(self):
        return int(self.counts.sum())


@dataclass
class EvalReport:
    accuracy: float
    per_class: np.ndarray  # (K, 3): precision, recall, f1
    macro_average: tuple
    confusion: ConfusionMatrix


def confusion_matrix(y_true, y_pred, class_count=None, class_names=None):
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if y_true.shape != y_pred.shape:
        raise ShapeError(f"{y_true.shape} labels vs {y_pred.shape} predictions")
    if y_true.size == 0:
        raise EmptyInputError("empty test set")
    k = class_count or int(max(y_true.max(), y_pred.max()) + 1)
    counts = np.zeros((k, k), dtype=np.int64)
    np.add.at(counts, (y_true, y_pred), 1)
    return ConfusionMatrix(counts, list(class_names) if class_names else [str(i) for i in range(k)])


def _ratio(num, den):
    return np.divide(num, den, out=np.zeros(num.shape), where=den > 0)


def report_from_predictions(y_true, y_pred, class_count=None, class_names=None):
    cm = confusion_matrix(y_true, y_pred, class_count, class_names)
    c = cm.counts.astype(np.float64)
    tp = np.diag(c)
    precision = _ratio(tp, c.sum(axis=0))
    recall = _ratio(tp, c.sum(axis=1))
    f1 = _ratio(2 * precision * recall, precision + recall)
    per_class = np.stack([precision, recall, f1], axis=1)
    return EvalReport(float(tp.sum() / c.sum()), per_class, tuple(per_class.mean(axis=0)), cm)


def evaluate(predict, X_test, y_test, class_count=None, class_names=None):
    """Score ``predict`` (features -> class ids) on a labelled test set."""
    y_test = np.asarray(y_test)
    if y_test.size == 0:
        raise EmptyInputError("empty test set")
    return report_from_predictions(y_test, predict(X_test), class_count, class_names)


def normalize_confusion(cm):
    """Row-normalise so each true class sums to one."""
    counts = cm.counts if isinstance(cm, ConfusionMatrix) else np.asarray(cm)
    rows = counts.sum(axis=1)
    empty = np.flatnonzero(rows == 0)
    if empty.size:
        raise ZeroDivisionError(f"class {int(empty[0])} has no samples; cannot normalise its row")
    return counts / rows[:, None].astype(np.float64)


def export_report(report, path):
    """Write ``<path>`` (per-class metrics) and ``<stem>_confusion.csv``.

    Returns both paths.
    """
    path = Path(path)
    names = report.confusion.class_names
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["class", "precision", "recall", "f1"])
        for name, row in zip(names, report.per_class):
            w.writerow([name] + [f"{v:.4f}" for v in row])
        w.writerow(["macro"] + [f"{v:.4f}" for v in report.macro_average])
    cm_path = path.with_name(path.stem + "_confusion.csv")
    with open(cm_path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["true\\pred"] + names)
        for name, row in zip(names, normalize_confusion(report.confusion)):
            w.writerow([name] + [f"{v:.4f}" for v in row])
    return path, cm_path


def read_report_csv(path):
    """Parse a per-class CSV back into ``{class: (precision, recall, f1)}``."""
    with open(path, encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["class", "precision", "recall", "f1"]:
        raise ValueError(f"{path}: not a metrics report")
    return {r[0]: tuple(float(v) for v in r[1:]) for r in rows[1:]}
