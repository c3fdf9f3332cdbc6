"""Confusion matrix and per-class / macro recall and precision."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .aami import AamiClass
from .errors import ClassOutOfRange, LengthMismatch, NotSquare


@dataclass
class ClassMetrics:
    recall: float
    precision: float
    recall_defined: bool = True      # False when the class has no true samples
    precision_defined: bool = True   # False when the class is never predicted


@dataclass
class EvalReport:
    confusion: np.ndarray            # (C, C), rows = true class, cols = predicted
    per_class: list[ClassMetrics]
    macro_recall: float
    macro_precision: float
    flags: list[str] = field(default_factory=list)


def confusion_matrix(preds, labels, num_classes: int) -> np.ndarray:
    """Count matrix with entry (t, p) = samples of true class t predicted p."""
    preds = np.asarray(preds, dtype=np.intp)
    labels = np.asarray(labels, dtype=np.intp)
    if preds.shape != labels.shape or preds.ndim != 1:
        raise LengthMismatch(f"preds {preds.shape} vs labels {labels.shape}")
    if preds.size == 0:
        raise LengthMismatch("need at least one prediction")
    stacked = np.concatenate([preds, labels])
    if stacked.min() < 0 or stacked.max() >= num_classes:
        raise ClassOutOfRange(f"class index outside [0, {num_classes})")
    matrix = np.zeros((num_classes, num_classes), dtype=np.int64)
    np.add.at(matrix, (labels, preds), 1)
    return matrix


def recall_precision(confusion: np.ndarray) -> EvalReport:
    """Per-class recall TP/(TP+FN) and precision TP/(TP+FP), plus their
    unweighted (macro) means.

    A zero denominator scores 0 and raises a flag instead of being dropped
    from the macro mean, so reports stay deterministic and conservative.
    """
    confusion = np.asarray(confusion)
    if confusion.ndim != 2 or confusion.shape[0] != confusion.shape[1]:
        raise NotSquare(f"confusion matrix has shape {confusion.shape}")
    if np.any(confusion < 0):
        raise ValueError("confusion matrix entries must be >= 0")

    num_classes = confusion.shape[0]
    true_totals = confusion.sum(axis=1)
    pred_totals = confusion.sum(axis=0)
    per_class: list[ClassMetrics] = []
    flags: list[str] = []
    for c in range(num_classes):
        tp = int(confusion[c, c])
        name = AamiClass(c).letter if c < len(AamiClass) else str(c)
        if true_totals[c] > 0:
            recall = tp / int(true_totals[c])
            recall_defined = True
        else:
            recall, recall_defined = 0.0, False
            flags.append(f"class {name}: recall undefined (no true samples), scored 0")
        if pred_totals[c] > 0:
            precision = tp / int(pred_totals[c])
            precision_defined = True
        else:
            precision, precision_defined = 0.0, False
            flags.append(f"class {name}: precision undefined (never predicted), scored 0")
        per_class.append(ClassMetrics(recall=recall, precision=precision,
                                      recall_defined=recall_defined,
                                      precision_defined=precision_defined))
    return EvalReport(
        confusion=confusion.astype(np.int64),
        per_class=per_class,
        macro_recall=float(np.mean([m.recall for m in per_class])),
        macro_precision=float(np.mean([m.precision for m in per_class])),
        flags=flags,
    )


def class_names(num_classes: int) -> list[str]:
    return [AamiClass(c).letter if c < len(AamiClass) else str(c)
            for c in range(num_classes)]


def report_to_json(report: EvalReport, extra: dict | None = None) -> str:
    payload = {
        "confusion": report.confusion.tolist(),
        "classes": class_names(report.confusion.shape[0]),
        "per_class": [
            {"class": name, "recall": m.recall, "precision": m.precision,
             "recall_defined": m.recall_defined,
             "precision_defined": m.precision_defined}
            for name, m in zip(class_names(report.confusion.shape[0]), report.per_class)
        ],
        "macro_recall": report.macro_recall,
        "macro_precision": report.macro_precision,
        "flags": report.flags,
    }
    if extra:
        payload.update(extra)
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def report_to_text(report: EvalReport) -> str:
    """Aligned plain-text rendering of the confusion matrix and metrics."""
    names = class_names(report.confusion.shape[0])
    width = max(7, max(len(n) for n in names) + 1,
                len(str(int(report.confusion.max(initial=0)))) + 2)
    lines = ["confusion matrix (rows = true, cols = predicted)"]
    header = " " * width + "".join(f"{n:>{width}}" for n in names)
    lines.append(header)
    for name, row in zip(names, report.confusion):
        lines.append(f"{name:>{width}}" + "".join(f"{int(v):>{width}}" for v in row))
    lines.append("")
    lines.append(f"{'class':>{width}}{'recall':>12}{'precision':>12}")
    for name, m in zip(names, report.per_class):
        rec = f"{m.recall:.4f}" + ("" if m.recall_defined else "*")
        pre = f"{m.precision:.4f}" + ("" if m.precision_defined else "*")
        lines.append(f"{name:>{width}}{rec:>12}{pre:>12}")
    lines.append(f"{'macro':>{width}}{report.macro_recall:>12.4f}"
                 f"{report.macro_precision:>12.4f}")
    if report.flags:
        lines.append("")
        lines.extend(f"* {flag}" for flag in report.flags)
    return "\n".join(lines) + "\n"
