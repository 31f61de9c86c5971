"""Seeded, deterministic mini-batch training with Adam and optional class weights."""

from __future__ import annotations

import logging
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from offlang.balance import ClassWeights, class_weights
from offlang.corpus import Dataset, dataset_stats
from offlang.metrics import EvalReport, confusion, eval_report, macro_f1
from offlang.nnet.model import ClassifierSpec, ModelParams, init_params, loss_and_grads, predict
from offlang.nnet.optim import AdamState, adam_step
from offlang.nnet.vocab import Vocab, build_vocab, encode_batch

log = logging.getLogger(__name__)

FINETUNE_LR = 2e-5
# from-scratch desk models barely move at the fine-tuning rate; presets use this
DESK_LR = 1e-3

_U64 = (1 << 64) - 1


class TrainingError(ValueError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 20
    batch_size: int = 16
    learning_rate: float = FINETUNE_LR
    weighted: bool = False
    seed: int = 0
    shuffle: bool = True
    max_vocab: int = 20000
    early_stopping: bool = False

    def __post_init__(self):
        if self.epochs < 1:
            raise TrainingError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise TrainingError(f"batch_size must be >= 1, got {self.batch_size}")
        if not self.learning_rate > 0:
            raise TrainingError("learning_rate must be positive")
        if self.early_stopping:
            raise TrainingError("early stopping is not supported; every run trains for exactly `epochs` epochs")

    def to_dict(self) -> dict:
        return asdict(self)


def desk_preset(**overrides) -> TrainConfig:
    """The default regimen with a learning rate suited to training from scratch."""
    return TrainConfig(**{"learning_rate": DESK_LR, **overrides})


@dataclass
class TrainHistory:
    loss: list[float] = field(default_factory=list)
    train_macro_f1: list[float] = field(default_factory=list)
    seconds: float = field(default=0.0, compare=False)

    def to_dict(self) -> dict:
        return {"loss": self.loss, "train_macro_f1": self.train_macro_f1}


@dataclass
class TrainResult:
    params: ModelParams
    history: TrainHistory
    vocab: Vocab
    spec: ClassifierSpec
    labels: tuple[str, ...]
    weights: ClassWeights | None = None


def seeded_rng(seed: int, stream: int) -> np.random.Generator:
    """Philox generator keyed by (seed, stream). Stream 0 initializes
    parameters; stream e+1 drives the shuffle and dropout of epoch e."""
    key = np.array([seed & _U64, stream & _U64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def trim_padding(ids, mask):
    """Drop trailing columns that are padding in every row of the batch."""
    width = int(mask.sum(1).max()) if len(mask) else 1
    return ids[:, :width], mask[:, :width]


def predict_encoded(params, spec, ids, mask, batch_size: int = 256) -> np.ndarray:
    out = [
        predict(params, spec, *trim_padding(ids[i : i + batch_size], mask[i : i + batch_size]))
        for i in range(0, len(ids), batch_size)
    ]
    return np.concatenate(out) if out else np.zeros(0, dtype=np.int64)


def train(data: Dataset, spec: ClassifierSpec, cfg: TrainConfig) -> TrainResult:
    """Train from scratch for exactly ``cfg.epochs`` epochs and return the final parameters.

    Texts are used as given; clean them first. The vocabulary comes from
    this dataset only.
    """
    if len(data) == 0:
        raise TrainingError("cannot train on an empty dataset")
    if spec.num_classes != data.scheme.num_classes:
        raise TrainingError(
            f"spec has {spec.num_classes} classes but the {data.scheme.value} scheme has {data.scheme.num_classes}"
        )
    started = time.perf_counter()
    labels = data.scheme.classes
    weights = class_weights(dataset_stats(data)) if cfg.weighted else None
    w_arr = weights.as_array() if weights else None

    vocab = build_vocab(data.texts, cfg.max_vocab)
    ids, mask = encode_batch(data.texts, vocab, spec.max_len)
    y = np.asarray(data.targets, dtype=np.int64)
    n = len(y)

    params = init_params(spec, len(vocab), seeded_rng(cfg.seed, 0))
    state = AdamState()
    history = TrainHistory()
    for epoch in range(cfg.epochs):
        rng = seeded_rng(cfg.seed, epoch + 1)
        order = rng.permutation(n) if cfg.shuffle else np.arange(n)
        total = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            b_ids, b_mask = trim_padding(ids[idx], mask[idx])
            loss, grads = loss_and_grads(params, spec, b_ids, b_mask, y[idx], w_arr, rng=rng)
            adam_step(params, grads, state, cfg.learning_rate)
            total += loss * len(idx)
        preds = predict_encoded(params, spec, ids, mask)
        history.loss.append(total / n)
        history.train_macro_f1.append(macro_f1(confusion(preds, y, labels)))
        log.info("epoch %d/%d loss %.6f train macro-F1 %.4f", epoch + 1, cfg.epochs, history.loss[-1], history.train_macro_f1[-1])
    history.seconds = time.perf_counter() - started
    return TrainResult(params, history, vocab, spec, labels, weights)


def evaluate(params: ModelParams, spec: ClassifierSpec, vocab: Vocab, data: Dataset) -> EvalReport:
    ids, mask = encode_batch(data.texts, vocab, spec.max_len)
    preds = predict_encoded(params, spec, ids, mask)
    return eval_report(confusion(preds, data.targets, data.scheme.classes))
