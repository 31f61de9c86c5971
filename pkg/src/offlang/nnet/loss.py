"""Softmax and class-weighted cross-entropy."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

EPS = 1e-12


def softmax(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    e = np.exp(z - z.max(-1, keepdims=True))
    return e / e.sum(-1, keepdims=True)


@dataclass
class LossBatch:
    """Per-sample class probabilities, true classes and optional class weights.

    `targets` may be given as class indices or as one-hot rows.
    """

    probs: np.ndarray
    targets: np.ndarray
    weights: np.ndarray | None = None

    def __post_init__(self):
        self.probs = np.atleast_2d(np.asarray(self.probs, dtype=np.float64))
        t = np.asarray(self.targets)
        if t.ndim == 2:
            if not np.all((t == 0) | (t == 1)) or not np.all(t.sum(1) == 1):
                raise ValueError("one-hot targets need exactly one 1 per row")
            t = t.argmax(1)
        self.targets = np.atleast_1d(t).astype(np.int64)
        n, C = self.probs.shape
        if len(self.targets) != n:
            raise ValueError(f"{len(self.targets)} targets for {n} probability rows")
        if np.any((self.targets < 0) | (self.targets >= C)):
            raise ValueError("target index out of range")
        if not np.allclose(self.probs.sum(1), 1.0, rtol=0.0, atol=1e-9):
            raise ValueError("probability rows must sum to 1 within 1e-9")
        if self.weights is not None:
            self.weights = np.asarray(self.weights, dtype=np.float64)
            if self.weights.shape != (C,):
                raise ValueError(f"expected {C} class weights, got shape {self.weights.shape}")

    @property
    def num_classes(self) -> int:
        return self.probs.shape[1]


def weighted_ce_loss(b: LossBatch) -> float:
    """Mean over samples of ``w[y] * -log(p[y])``, with p clamped to [1e-12, 1-1e-12].

    With two classes and no weights this is
    ``-t*log(s) - (1-t)*log(1-s)`` averaged over the batch.
    """
    n = len(b.targets)
    if n == 0:
        return 0.0
    py = np.clip(b.probs[np.arange(n), b.targets], EPS, 1.0 - EPS)
    w = np.ones(n) if b.weights is None else b.weights[b.targets]
    return float(np.mean(w * -np.log(py)))
