"""Whitespace vocabulary and fixed-length encoding."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

PAD, UNK, CLS, CTX = 0, 1, 2, 3
RESERVED = ("[PAD]", "[UNK]", "[CLS]", "[CTX]")


@dataclass(frozen=True)
class Vocab:
    tokens: tuple[str, ...]
    max_size: int

    def __post_init__(self):
        if self.tokens[: len(RESERVED)] != RESERVED:
            raise ValueError("reserved tokens must occupy ids 0..3")
        object.__setattr__(self, "_index", {t: i for i, t in enumerate(self.tokens)})

    def __len__(self) -> int:
        return len(self.tokens)

    def __getitem__(self, token: str) -> int:
        return self._index.get(token, UNK)

    def __contains__(self, token: str) -> bool:
        return token in self._index

    def to_dict(self) -> dict[str, int]:
        return dict(self._index)


def build_vocab(corpus, max_size: int = 20000) -> Vocab:
    """Rank whitespace tokens by frequency, breaking ties by first occurrence."""
    if max_size <= len(RESERVED):
        raise ValueError(f"max_size must exceed {len(RESERVED)}")
    freq: Counter[str] = Counter()
    first: dict[str, int] = {}
    for text in corpus:
        for tok in text.split():
            if tok in RESERVED:
                continue
            freq[tok] += 1
            first.setdefault(tok, len(first))
    ranked = sorted(freq, key=lambda t: (-freq[t], first[t]))
    return Vocab(RESERVED + tuple(ranked[: max_size - len(RESERVED)]), max_size)


def encode(text: str, vocab: Vocab, max_len: int) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(ids, mask)``: ``[CLS] + token ids``, truncated and right-padded."""
    ids = np.full(max_len, PAD, dtype=np.int64)
    mask = np.zeros(max_len, dtype=np.int8)
    seq = [CLS] + [vocab[t] for t in text.split()]
    seq = seq[:max_len]
    ids[: len(seq)] = seq
    mask[: len(seq)] = 1
    return ids, mask


def encode_batch(texts, vocab: Vocab, max_len: int) -> tuple[np.ndarray, np.ndarray]:
    texts = list(texts)
    ids = np.zeros((len(texts), max_len), dtype=np.int64)
    mask = np.zeros((len(texts), max_len), dtype=np.int8)
    for i, text in enumerate(texts):
        ids[i], mask[i] = encode(text, vocab, max_len)
    return ids, mask
