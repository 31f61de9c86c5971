"""Synthetic binary corpora for smoke tests and property checks."""

from __future__ import annotations

import numpy as np

from offlang.corpus import Dataset, Label, Language, Post, Scheme, Split

NOT_WORDS = tuple(f"calm{i}" for i in range(10))
HOF_WORDS = tuple(f"rude{i}" for i in range(10))
FILLER = tuple(f"the{i}" for i in range(10))


def _dataset(rows, split: Split) -> Dataset:
    posts = [Post(f"syn{i:05d}", text, Language.ENGLISH, Label.from_index(y, Scheme.BINARY)) for i, (text, y) in enumerate(rows)]
    return Dataset(posts, Scheme.BINARY, split)


def separable_corpus(n: int = 200, seed: int = 0, split: Split = Split.TRAIN) -> Dataset:
    """Balanced two-class corpus: every text holds 2-4 keywords from its class's
    (disjoint) keyword set plus 2-4 shared filler words."""
    rng = np.random.default_rng(seed)
    rows = []
    for i in range(n):
        y = i % 2
        words = HOF_WORDS if y else NOT_WORDS
        toks = list(rng.choice(words, rng.integers(2, 5))) + list(rng.choice(FILLER, rng.integers(2, 5)))
        rng.shuffle(toks)
        rows.append((" ".join(toks), y))
    order = rng.permutation(n)
    return _dataset([rows[i] for i in order], split)


def imbalanced_corpus(n: int = 200, minority_frac: float = 0.1, seed: int = 0, split: Split = Split.TRAIN) -> Dataset:
    """HOF is the minority class. Both classes draw two words from one shared
    pool of six, with different preferences, so many texts are ambiguous
    and cannot be memorized away."""
    rng = np.random.default_rng(seed)
    pool = np.array([f"w{i}" for i in range(6)])
    p_not = np.array([0.25, 0.25, 0.25, 1 / 12, 1 / 12, 1 / 12])
    p_hof = p_not[::-1].copy()
    n_min = max(1, round(n * minority_frac))
    rows = []
    for i in range(n):
        y = 1 if i < n_min else 0
        toks = rng.choice(pool, 2, p=p_hof if y else p_not)
        rows.append((" ".join(toks), y))
    order = rng.permutation(n)
    return _dataset([rows[i] for i in order], split)
