"""Inverse-frequency class weights, normalized so the frequency-weighted mean is 1."""

from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_DOWN, Decimal

import numpy as np

from offlang.corpus import ClassCounts


class BalanceError(ValueError):
    pass


@dataclass(frozen=True)
class ClassWeights:
    labels: tuple[str, ...]
    weights: tuple[float, ...]
    source_counts: ClassCounts

    def as_array(self) -> np.ndarray:
        return np.asarray(self.weights, dtype=np.float64)

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.labels, self.weights))

    def rounded(self, places: int = 4) -> dict[str, float]:
        return {k: round(w, places) for k, w in self.as_dict().items()}

    def truncated(self, places: int = 4) -> dict[str, str]:
        """Digits cut (not rounded) after `places` decimals.

        The HASOC weight tables are conventionally quoted this way, so the
        English HOF weight 0.768293 reads 0.7682.
        """
        q = Decimal(1).scaleb(-places)
        return {k: str(Decimal(repr(w)).quantize(q, rounding=ROUND_DOWN)) for k, w in self.as_dict().items()}

    def format_table(self, order: tuple[str, ...] | None = None) -> str:
        order = order or self.labels
        d = self.truncated(4)
        width = max(5, *(len(label) for label in order))
        lines = [f"{'class':<{width}}  {'count':>7}  weight"]
        counts = self.source_counts.as_dict()
        for label in order:
            lines.append(f"{label:<{width}}  {counts[label]:>7}  {d[label]}")
        lines.append(" / ".join(d[label] for label in order))
        return "\n".join(lines)


def class_weights(counts: ClassCounts) -> ClassWeights:
    """w_c = N / (C * n_c).

    With this normalization sum_c (n_c / N) * w_c == 1, and the truncated 4-decimal
    view gives the usual HASOC 2021 weight tables.
    """
    if not counts.counts:
        raise BalanceError("no classes to weight")
    zero = [lbl for lbl, n in zip(counts.labels, counts.counts) if n <= 0]
    if zero:
        raise BalanceError(f"class weight undefined for zero-count class(es): {', '.join(zero)}")
    total = counts.total
    n_classes = len(counts.counts)
    weights = tuple(total / (n_classes * n) for n in counts.counts)
    return ClassWeights(counts.labels, weights, counts)


def unit_weights(counts: ClassCounts) -> ClassWeights:
    return ClassWeights(counts.labels, tuple(1.0 for _ in counts.labels), counts)
