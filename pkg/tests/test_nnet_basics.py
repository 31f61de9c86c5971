import math

import numpy as np
import pytest

from offlang.nnet.loss import LossBatch, weighted_ce_loss
from offlang.nnet.model import predict_from_probs
from offlang.nnet.optim import AdamState, adam_step
from offlang.nnet.vocab import CLS, PAD, build_vocab, encode


class TestLoss:
    def test_perfect_prediction(self):
        assert weighted_ce_loss(LossBatch([[1.0, 0.0]], [0])) == pytest.approx(0.0, abs=1e-9)

    def test_half(self):
        assert weighted_ce_loss(LossBatch([[0.5, 0.5]], [0])) == pytest.approx(0.693147180559945, abs=1e-9)

    def test_weighted_hof(self):
        # NOT=0, HOF=1; 0.7682 is the English HOF weight at four decimals
        loss = weighted_ce_loss(LossBatch([[0.5, 0.5]], [1], weights=[1.4318, 0.7682]))
        assert loss == pytest.approx(0.7682 * math.log(2), abs=1e-9)
        assert loss == pytest.approx(0.532476, abs=1e-6)

    def test_one_hot_targets(self):
        b = LossBatch([[0.2, 0.8], [0.6, 0.4]], [[0, 1], [1, 0]])
        assert list(b.targets) == [1, 0]
        assert weighted_ce_loss(b) == pytest.approx(-(math.log(0.8) + math.log(0.6)) / 2, abs=1e-15)

    def test_binary_formula(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            s = rng.uniform(1e-6, 1 - 1e-6)
            t = int(rng.integers(0, 2))
            got = weighted_ce_loss(LossBatch([[s, 1 - s]], [0 if t else 1]))
            assert got == pytest.approx(-t * math.log(s) - (1 - t) * math.log(1 - s), abs=1e-12)

    def test_unit_weights_bitwise(self):
        rng = np.random.default_rng(1)
        p = rng.dirichlet(np.ones(4), size=20)
        y = rng.integers(0, 4, 20)
        assert weighted_ce_loss(LossBatch(p, y)) == weighted_ce_loss(LossBatch(p, y, np.ones(4)))

    def test_scaling_weights(self):
        rng = np.random.default_rng(2)
        p = rng.dirichlet(np.ones(3), size=10)
        y = rng.integers(0, 3, 10)
        w = rng.uniform(0.5, 2, 3)
        base = weighted_ce_loss(LossBatch(p, y, w))
        assert weighted_ce_loss(LossBatch(p, y, 2 * w)) == 2 * base
        assert weighted_ce_loss(LossBatch(p, y, 3 * w)) == pytest.approx(3 * base, rel=1e-15)

    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError):
            LossBatch([[0.5, 0.6]], [0])


class TestVocab:
    def test_frequency_then_first_occurrence(self):
        v = build_vocab(["a b", "a"], max_size=10)
        assert v.to_dict() == {"[PAD]": 0, "[UNK]": 1, "[CLS]": 2, "[CTX]": 3, "a": 4, "b": 5}

    def test_empty(self):
        assert build_vocab([], 10).tokens == ("[PAD]", "[UNK]", "[CLS]", "[CTX]")

    def test_tie_break(self):
        v = build_vocab(["x y"], 10)
        assert v["x"] < v["y"]

    def test_against_counter_oracle(self):
        rng = np.random.default_rng(3)
        words = [f"w{i}" for i in range(30)]
        corpus = [" ".join(rng.choice(words, rng.integers(0, 8))) for _ in range(50)]
        v = build_vocab(corpus, max_size=20)
        # oracle: count and record first position by a flat scan
        flat = " ".join(corpus).split()
        ranked = sorted(set(flat), key=lambda t: (-flat.count(t), flat.index(t)))
        assert v.tokens[4:] == tuple(ranked[:16])
        assert len(v) == 20

    def test_ctx_separator_is_reserved(self):
        v = build_vocab(["a [CTX] b"], 10)
        assert v["[CTX]"] == 3 and v.tokens.count("[CTX]") == 1

    def test_max_size_precondition(self):
        with pytest.raises(ValueError):
            build_vocab(["a"], 4)


class TestEncode:
    vocab = build_vocab(["a b", "a"], 10)

    def test_basic(self):
        ids, mask = encode("a b", self.vocab, 5)
        assert ids.tolist() == [2, 4, 5, 0, 0]
        assert mask.tolist() == [1, 1, 1, 0, 0]

    def test_empty(self):
        ids, mask = encode("", self.vocab, 4)
        assert ids.tolist() == [CLS, PAD, PAD, PAD]
        assert mask.tolist() == [1, 0, 0, 0]

    def test_truncation(self):
        ids, mask = encode(" ".join(["a"] * 100), self.vocab, 8)
        assert len(ids) == 8 and ids[0] == CLS and mask.all()

    def test_oov(self):
        ids, _ = encode("zzz", self.vocab, 3)
        assert ids.tolist() == [2, 1, 0]


class TestPredict:
    def test_examples(self):
        assert predict_from_probs([[0.2, 0.8]]).tolist() == [1]
        assert predict_from_probs([[0.5, 0.5]]).tolist() == [0]
        assert predict_from_probs([[0.1, 0.4, 0.4, 0.1]]).tolist() == [1]

    def test_monotone_transform_invariance(self):
        rng = np.random.default_rng(4)
        z = rng.normal(size=(50, 4))
        for f in (np.exp, lambda x: 3 * x + 1, lambda x: x**3, np.arctan):
            assert (predict_from_probs(f(z)) == predict_from_probs(z)).all()


def _adam_oracle(p, gs, lr, b1=0.9, b2=0.999, eps=1e-8):
    m = v = 0.0
    for t, g in enumerate(gs, start=1):
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        p = p - lr * (m / (1 - b1**t)) / (math.sqrt(v / (1 - b2**t)) + eps)
    return p


class TestAdam:
    def test_zero_gradients(self):
        params = {"w": np.array([1.0, -2.0])}
        before = params["w"].copy()
        state = AdamState()
        for _ in range(3):
            adam_step(params, {"w": np.zeros(2)}, state, lr=0.1)
        assert (params["w"] == before).all()

    def test_first_step_is_signed_lr(self):
        g = np.array([0.3, -5.0, 1e-3])
        params = {"w": np.zeros(3)}
        adam_step(params, {"w": g}, AdamState(), lr=0.01)
        np.testing.assert_allclose(params["w"], -0.01 * g / (np.abs(g) + 1e-8), rtol=1e-12)
        np.testing.assert_allclose(params["w"], -0.01 * np.sign(g), rtol=1e-4)

    def test_momentum_after_gradient_stops(self):
        params = {"w": np.array([0.0])}
        state = AdamState()
        seq = [0.5, 0.0, 0.0]
        trace = []
        for g in seq:
            adam_step(params, {"w": np.array([g])}, state, lr=0.1)
            trace.append(params["w"][0])
        steps = np.diff([0.0] + trace)
        assert steps[1] < 0 and steps[2] < 0
        assert abs(steps[2]) < abs(steps[1])
        for k in range(1, 4):
            params = {"w": np.array([0.0])}
            state = AdamState()
            for g in seq[:k]:
                adam_step(params, {"w": np.array([g])}, state, lr=0.1)
            assert params["w"][0] == pytest.approx(_adam_oracle(0.0, seq[:k], 0.1), rel=1e-14)

    def test_matches_oracle_random(self):
        rng = np.random.default_rng(5)
        gs = rng.normal(size=20)
        params = {"w": np.array([0.7])}
        state = AdamState()
        for g in gs:
            adam_step(params, {"w": np.array([g])}, state, lr=1e-3)
        assert params["w"][0] == pytest.approx(_adam_oracle(0.7, gs, 1e-3), rel=1e-13)
        assert state.t == 20
