"""Evaluation metrics: confusion counts, precision/recall/F1/accuracy, AUROC."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class EvalMetrics:
    precision: float
    recall: float
    f1: float
    accuracy: float
    auroc: float | None  # absent when the label set has a single class
    tp: int
    fn: int
    fp: int
    tn: int

    @property
    def false_positive_rate(self) -> float:
        denom = self.fp + self.tn
        return self.fp / denom if denom else 0.0


def auroc(scores: np.ndarray, labels: np.ndarray) -> float | None:
    """Area under the ROC curve by trapezoidal integration over every
    distinct score threshold; None when only one class is present."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    positives = int((labels == 1).sum())
    negatives = int((labels == 0).sum())
    if positives == 0 or negatives == 0:
        return None
    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    sorted_labels = labels[order]
    tp_cum = np.cumsum(sorted_labels == 1)
    fp_cum = np.cumsum(sorted_labels == 0)
    # Keep only the last index of each tied score block.
    distinct = np.r_[sorted_scores[1:] != sorted_scores[:-1], True]
    tpr = np.r_[0.0, tp_cum[distinct] / positives]
    fpr = np.r_[0.0, fp_cum[distinct] / negatives]
    return float(np.trapezoid(tpr, fpr))


def evaluate(probabilities: np.ndarray, labels: np.ndarray, threshold: float = 0.5) -> EvalMetrics:
    """Confusion at the threshold (probability >= threshold counts positive)
    plus derived rates; denominator-zero rates are 0 by convention."""
    probabilities = np.asarray(probabilities, dtype=np.float64)
    labels = np.asarray(labels)
    if probabilities.shape != labels.shape:
        raise ValueError("probabilities and labels must have equal length")
    predicted = probabilities >= threshold
    actual = labels == 1
    tp = int(np.sum(predicted & actual))
    fp = int(np.sum(predicted & ~actual))
    fn = int(np.sum(~predicted & actual))
    tn = int(np.sum(~predicted & ~actual))
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    accuracy = (tp + tn) / len(labels)
    return EvalMetrics(
        precision=precision,
        recall=recall,
        f1=f1,
        accuracy=accuracy,
        auroc=auroc(probabilities, labels),
        tp=tp,
        fn=fn,
        fp=fp,
        tn=tn,
    )


def metrics_from_confusion(tp: int, fn: int, fp: int, tn: int) -> EvalMetrics:
    """Metrics from published confusion counts (no scores, so no AUROC)."""
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    accuracy = (tp + tn) / (tp + fn + fp + tn)
    return EvalMetrics(
        precision=precision, recall=recall, f1=f1, accuracy=accuracy, auroc=None,
        tp=tp, fn=fn, fp=fp, tn=tn,
    )


def format_metrics_table(rows: list[tuple[str, EvalMetrics]]) -> str:
    """Aligned report in the order P, R, F1, Acc, AUC."""
    lines = [f"{'Row':<42} {'P':>6} {'R':>6} {'F1':>6} {'Acc':>6} {'AUC':>6}"]
    for name, m in rows:
        auc = f"{m.auroc:.2f}" if m.auroc is not None else "-"
        lines.append(
            f"{name:<42} {m.precision:>6.2f} {m.recall:>6.2f} {m.f1:>6.2f} {m.accuracy:>6.2f} {auc:>6}"
        )
    return "\n".join(lines)


__all__ = ["EvalMetrics", "auroc", "evaluate", "format_metrics_table", "metrics_from_confusion"]
