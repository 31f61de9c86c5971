from offlang.nnet.loss import EPS, LossBatch, softmax, weighted_ce_loss
from offlang.nnet.model import (
    ClassifierSpec,
    ModelKind,
    ModelParams,
    forward,
    gradients,
    init_params,
    loss_and_grads,
    predict,
    predict_from_probs,
)
from offlang.nnet.optim import AdamState, adam_step
from offlang.nnet.vocab import CLS, CTX, PAD, UNK, Vocab, build_vocab, encode, encode_batch

__all__ = [
    "EPS", "LossBatch", "softmax", "weighted_ce_loss",
    "ClassifierSpec", "ModelKind", "ModelParams", "forward", "gradients", "init_params",
    "loss_and_grads", "predict", "predict_from_probs",
    "AdamState", "adam_step",
    "CLS", "CTX", "PAD", "UNK", "Vocab", "build_vocab", "encode", "encode_batch",
]
