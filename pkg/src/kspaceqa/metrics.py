"""Multi-class evaluation: confusion counts, PR/RE/F, ROC and AUC.

Per-class quantities are one-vs-rest. Micro metrics pool TP/FP/FN counts
over classes (for single-label problems micro precision == micro recall
== accuracy, exactly); macro metrics average the per-class values. AUC
sweeps thresholds over the observed scores with ties grouped, which
makes the trapezoidal area equal to the rank-averaged Mann-Whitney
statistic.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from .artifacts import N_CLASSES


def confusion(preds, labels, n_classes=N_CLASSES):
    """Count matrix with rows = true class, columns = predicted class."""
    preds = np.asarray(preds, dtype=np.int64)
    labels = np.asarray(labels, dtype=np.int64)
    if preds.ndim != 1 or labels.ndim != 1:
        raise ValueError("predictions and labels must be 1D")
    if preds.shape != labels.shape:
        raise ValueError(
            f"length mismatch: {preds.shape[0]} predictions, "
            f"{labels.shape[0]} labels")
    if preds.size == 0:
        raise ValueError("empty input")
    for name, a in (("prediction", preds), ("label", labels)):
        if a.min() < 0 or a.max() >= n_classes:
            raise ValueError(f"{name} class out of range 0..{n_classes - 1}")
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(cm, (labels, preds), 1)
    return cm


@dataclass
class MetricsReport:
    accuracy: float
    precision_micro: float
    recall_micro: float
    f_measure_micro: float
    precision_macro: float
    recall_macro: float
    f_measure_macro: float
    per_class: List[Dict]
    auc_per_class: Optional[List[Optional[float]]] = None
    auc_macro: Optional[float] = None

    def to_dict(self):
        return {
            "accuracy": self.accuracy,
            "precision_micro": self.precision_micro,
            "recall_micro": self.recall_micro,
            "f_measure_micro": self.f_measure_micro,
            "precision_macro": self.precision_macro,
            "recall_macro": self.recall_macro,
            "f_measure_macro": self.f_measure_macro,
            "per_class": self.per_class,
            "auc_per_class": self.auc_per_class,
            "auc_macro": self.auc_macro,
        }


def _f_measure(pr, re):
    return 0.0 if pr + re == 0 else 2.0 * pr * re / (pr + re)


def classification_metrics(cm) -> MetricsReport:
    """Derive PR/RE/F (micro and macro) from a confusion matrix.

    Zero-denominator per-class precision or recall is reported as 0 and
    flagged in the per-class entries.
    """
    cm = np.asarray(cm, dtype=np.int64)
    if cm.ndim != 2 or cm.shape[0] != cm.shape[1]:
        raise ValueError("confusion matrix must be square")
    total = int(cm.sum())
    if total <= 0:
        raise ValueError("confusion matrix is empty")
    n = cm.shape[0]
    tp = np.diag(cm).astype(np.float64)
    fp = cm.sum(axis=0) - tp
    fn = cm.sum(axis=1) - tp
    per_class = []
    precisions, recalls, fs = [], [], []
    for c in range(n):
        p_den = tp[c] + fp[c]
        r_den = tp[c] + fn[c]
        pr = tp[c] / p_den if p_den > 0 else 0.0
        re = tp[c] / r_den if r_den > 0 else 0.0
        per_class.append({
            "class_id": c,
            "precision": pr,
            "recall": re,
            "f_measure": _f_measure(pr, re),
            "support": int(tp[c] + fn[c]),
            "precision_zero_div": bool(p_den == 0),
            "recall_zero_div": bool(r_den == 0),
        })
        precisions.append(pr)
        recalls.append(re)
        fs.append(_f_measure(pr, re))
    accuracy = float(tp.sum() / total)
    micro_pr = float(tp.sum() / (tp.sum() + fp.sum()))
    micro_re = float(tp.sum() / (tp.sum() + fn.sum()))
    return MetricsReport(
        accuracy=accuracy,
        precision_micro=micro_pr,
        recall_micro=micro_re,
        f_measure_micro=_f_measure(micro_pr, micro_re),
        precision_macro=float(np.mean(precisions)),
        recall_macro=float(np.mean(recalls)),
        f_measure_macro=float(np.mean(fs)),
        per_class=per_class,
    )


def roc_curve(scores, positive):
    """One-vs-rest ROC points for one class.

    Returns a list of (fpr, tpr) pairs, monotone in both coordinates,
    from (0, 0) to (1, 1). Tied scores collapse into a single sweep step.
    """
    scores = np.asarray(scores, dtype=np.float64)
    positive = np.asarray(positive, dtype=bool)
    if scores.shape != positive.shape or scores.ndim != 1:
        raise ValueError("scores and positive mask must be matching 1D arrays")
    n_pos = int(positive.sum())
    n_neg = int(positive.size - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise ValueError("ROC needs at least one positive and one negative")
    order = np.argsort(-scores, kind="stable")
    s = scores[order]
    p = positive[order]
    points = [(0.0, 0.0)]
    tp = fp = 0
    i = 0
    while i < s.size:
        j = i
        while j < s.size and s[j] == s[i]:
            j += 1
        tp += int(p[i:j].sum())
        fp += (j - i) - int(p[i:j].sum())
        points.append((fp / n_neg, tp / n_pos))
        i = j
    return points


def _trapezoid(points):
    area = 0.0
    for (x0, y0), (x1, y1) in zip(points[:-1], points[1:]):
        area += (x1 - x0) * (y0 + y1) / 2.0
    return area


def roc_auc(scores, labels, n_classes=N_CLASSES):
    """Per-class one-vs-rest AUC plus their macro average.

    Classes with no positives (or no negatives) have undefined AUC,
    reported as None and excluded from the macro mean. Scores need not
    be normalized; any strictly monotone transform leaves AUC unchanged.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if scores.ndim != 2 or scores.shape[1] != n_classes:
        raise ValueError(f"expected (N,{n_classes}) scores, got {scores.shape}")
    if labels.shape != (scores.shape[0],):
        raise ValueError("labels must be one class index per score row")
    if not np.all(np.isfinite(scores)):
        raise ValueError("scores must be finite")
    aucs = []
    for c in range(n_classes):
        positive = labels == c
        n_pos = int(positive.sum())
        if n_pos == 0 or n_pos == labels.size:
            aucs.append(None)
            continue
        aucs.append(float(_trapezoid(roc_curve(scores[:, c], positive))))
    defined = [a for a in aucs if a is not None]
    macro = float(np.mean(defined)) if defined else None
    return aucs, macro


def evaluate_scores(scores, labels, n_classes=N_CLASSES) -> MetricsReport:
    """Full report (confusion-derived metrics plus AUC) from score rows."""
    scores = np.asarray(scores, dtype=np.float64)
    preds = scores.argmax(axis=1)
    report = classification_metrics(confusion(preds, labels, n_classes))
    report.auc_per_class, report.auc_macro = roc_auc(scores, labels, n_classes)
    return report


def format_mean_std_table(rows, metrics=("accuracy", "precision", "recall",
                                         "f_measure", "auc")):
    """Render rows of {metric: (mean, std)} as a percent table.

    ``rows`` is a list of (label, values) pairs; values are fractions in
    [0, 1] and print as "99.41 +/- 0.24".
    """
    headers = ["Run"] + [m.replace("_", " ").title() for m in metrics]
    table = [headers]
    for label, values in rows:
        row = [label]
        for m in metrics:
            if m in values and values[m] is not None:
                mean, std = values[m]
                row.append(f"{100 * mean:.2f} +/- {100 * std:.2f}")
            else:
                row.append("-")
        table.append(row)
    widths = [max(len(r[i]) for r in table) for i in range(len(headers))]
    lines = []
    for idx, row in enumerate(table):
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)))
        if idx == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)
