import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from offlang.corpus import Label, Scheme
from offlang.metrics import confusion, eval_report, macro_f1
from offlang.sweep import summarize

BIN = ("NOT", "HOF")


def _from_matrix(m):
    golds, preds = [], []
    for g, row in enumerate(m):
        for p, n in enumerate(row):
            golds += [g] * n
            preds += [p] * n
    return preds, golds


def brute_macro_f1(preds, golds, C):
    """Per-class F1 from explicit counting, 0/0 taken as 0."""
    scores = []
    for c in range(C):
        tp = sum(1 for p, g in zip(preds, golds) if p == c and g == c)
        fp = sum(1 for p, g in zip(preds, golds) if p == c and g != c)
        fn = sum(1 for p, g in zip(preds, golds) if p != c and g == c)
        scores.append(2 * tp / (2 * tp + fp + fn) if tp + fp + fn else 0.0)
    return sum(scores) / C


@pytest.mark.parametrize(
    "matrix,expected",
    [([[1, 0], [0, 1]], 1.0), ([[2, 0], [2, 0]], 1 / 3), ([[1, 1], [1, 1]], 0.5), ([[0, 0], [0, 0]], 0.0)],
)
def test_examples(matrix, expected):
    preds, golds = _from_matrix(matrix)
    cm = confusion(preds, golds, BIN)
    assert cm.matrix.tolist() == matrix
    assert macro_f1(cm) == pytest.approx(expected, abs=1e-12)


def test_accepts_labels():
    golds = [Label(Scheme.BINARY, "NOT"), Label(Scheme.BINARY, "HOF")]
    assert macro_f1(confusion([0, 1], golds, BIN)) == 1.0


def test_length_mismatch():
    with pytest.raises(ValueError):
        confusion([0, 1], [0], BIN)


def test_report_fields():
    preds, golds = _from_matrix([[3, 1], [2, 4]])
    r = eval_report(confusion(preds, golds, BIN))
    assert r.precision == pytest.approx((3 / 5, 4 / 5))
    assert r.recall == pytest.approx((3 / 4, 4 / 6))
    assert r.support == (4, 6)
    assert r.accuracy == pytest.approx(0.7)
    d = r.to_dict()
    assert set(d) == {"labels", "per_class", "macro_f1", "accuracy", "matrix"}
    assert "macro F1" in r.format_table()


@settings(max_examples=200)
@given(st.integers(2, 4).flatmap(lambda C: st.tuples(st.just(C), st.lists(st.tuples(st.integers(0, C - 1), st.integers(0, C - 1)), max_size=40))))
def test_brute_force_oracle(case):
    C, pairs = case
    preds = [p for p, _ in pairs]
    golds = [g for _, g in pairs]
    labels = tuple(f"c{i}" for i in range(C))
    got = macro_f1(confusion(preds, golds, labels))
    assert got == pytest.approx(brute_macro_f1(preds, golds, C), abs=1e-12)
    assert 0.0 <= got <= 1.0
    # shuffling the sample order changes nothing
    perm = np.random.default_rng(len(pairs)).permutation(len(pairs))
    assert macro_f1(confusion([preds[i] for i in perm], [golds[i] for i in perm], labels)) == got


def test_class_relabeling_invariance():
    rng = np.random.default_rng(0)
    preds, golds = rng.integers(0, 4, 100), rng.integers(0, 4, 100)
    base = macro_f1(confusion(preds, golds, "abcd"))
    for perm in itertools.permutations(range(4)):
        perm = np.array(perm)
        assert macro_f1(confusion(perm[preds], perm[golds], "abcd")) == pytest.approx(base, abs=1e-15)


class TestSummary:
    def test_example(self):
        s = summarize([1, 2, 3], [0.70, 0.72, 0.71])
        assert s.mean == pytest.approx(0.71, abs=1e-12)
        assert s.spread == pytest.approx(0.02, abs=1e-12)
        assert s.stddev == pytest.approx(0.01, abs=1e-12)
        assert s.min == 0.70 and s.max == 0.72
        assert s.spread_pct == pytest.approx(100 * 0.02 / 0.71, abs=1e-9)

    def test_identical(self):
        s = summarize([0, 1, 2], [0.5, 0.5, 0.5])
        assert s.spread == 0.0 and s.stddev == 0.0 and s.mean == 0.5

    def test_needs_two(self):
        with pytest.raises(ValueError):
            summarize([0], [0.5])

    @given(st.lists(st.floats(0, 1), min_size=2, max_size=12), st.randoms())
    def test_order_invariance(self, scores, rnd):
        shuffled = scores[:]
        rnd.shuffle(shuffled)
        a = summarize(range(len(scores)), scores)
        b = summarize(range(len(scores)), shuffled)
        assert (a.mean, a.stddev, a.spread) == (b.mean, b.stddev, b.spread)
        assert abs(a.mean - math.fsum(scores) / len(scores)) <= 1e-12
        assert a.spread == max(scores) - min(scores)
