"""Confusion matrices, per-class precision/recall/F1 and macro F1."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np


def _as_indices(labels) -> np.ndarray:
    return np.asarray([getattr(x, "index", x) for x in labels], dtype=np.int64)


@dataclass(frozen=True)
class ConfusionMatrix:
    """Rows are gold classes, columns are predicted classes."""

    matrix: np.ndarray
    labels: tuple[str, ...]

    @property
    def total(self) -> int:
        return int(self.matrix.sum())


def confusion(preds, golds, labels) -> ConfusionMatrix:
    labels = tuple(labels)
    p, g = _as_indices(preds), _as_indices(golds)
    if len(p) != len(g):
        raise ValueError(f"{len(p)} predictions for {len(g)} gold labels")
    C = len(labels)
    if len(p) and (min(p.min(), g.min()) < 0 or max(p.max(), g.max()) >= C):
        raise ValueError("class index out of range")
    m = np.zeros((C, C), dtype=np.int64)
    np.add.at(m, (g, p), 1)
    return ConfusionMatrix(m, labels)


def per_class_prf(cm: ConfusionMatrix) -> tuple[list[float], list[float], list[float]]:
    """Precision, recall, F1 per class; any 0/0 is taken as 0."""
    m = cm.matrix
    precision, recall, f1 = [], [], []
    for c in range(m.shape[0]):
        tp = int(m[c, c])
        predicted = int(m[:, c].sum())
        gold = int(m[c, :].sum())
        p = tp / predicted if predicted else 0.0
        r = tp / gold if gold else 0.0
        precision.append(p)
        recall.append(r)
        f1.append(2 * p * r / (p + r) if p + r else 0.0)
    return precision, recall, f1


def macro_f1(cm: ConfusionMatrix) -> float:
    f1 = per_class_prf(cm)[2]
    return sum(f1) / len(f1) if f1 else 0.0


@dataclass(frozen=True)
class EvalReport:
    labels: tuple[str, ...]
    precision: tuple[float, ...]
    recall: tuple[float, ...]
    f1: tuple[float, ...]
    support: tuple[int, ...]
    macro_f1: float
    accuracy: float
    matrix: ConfusionMatrix

    def to_dict(self) -> dict:
        return {
            "labels": list(self.labels),
            "per_class": {
                lbl: {"precision": p, "recall": r, "f1": f, "support": s}
                for lbl, p, r, f, s in zip(self.labels, self.precision, self.recall, self.f1, self.support)
            },
            "macro_f1": self.macro_f1,
            "accuracy": self.accuracy,
            "matrix": self.matrix.matrix.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"

    def format_table(self) -> str:
        w = max(8, *(len(x) for x in self.labels))
        lines = [f"{'class':<{w}} {'precision':>9} {'recall':>9} {'f1':>9} {'support':>8}"]
        for lbl, p, r, f, s in zip(self.labels, self.precision, self.recall, self.f1, self.support):
            lines.append(f"{lbl:<{w}} {p:>9.4f} {r:>9.4f} {f:>9.4f} {s:>8d}")
        lines.append(f"{'macro F1':<{w}} {self.macro_f1:>9.4f}")
        lines.append(f"{'accuracy':<{w}} {self.accuracy:>9.4f}")
        lines.append("confusion (rows gold, cols predicted): " + " ".join(self.labels))
        for lbl, row in zip(self.labels, self.matrix.matrix.tolist()):
            lines.append(f"  {lbl:<{w}} " + " ".join(f"{v:>6d}" for v in row))
        return "\n".join(lines)


def eval_report(cm: ConfusionMatrix) -> EvalReport:
    p, r, f = per_class_prf(cm)
    total = cm.total
    return EvalReport(
        labels=cm.labels,
        precision=tuple(p),
        recall=tuple(r),
        f1=tuple(f),
        support=tuple(int(x) for x in cm.matrix.sum(1)),
        macro_f1=sum(f) / len(f),
        accuracy=float(np.trace(cm.matrix)) / total if total else 0.0,
        matrix=cm,
    )
