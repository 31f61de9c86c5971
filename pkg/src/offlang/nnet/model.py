"""Desk-scale text classifiers in float64 numpy with hand-written backprop.

Two kinds share one parameter-dict interface:

* ``MiniTransformer``: pre-norm encoder (masked multi-head self-attention,
  GELU feed-forward, residuals, final layer norm), CLS position pooled into a
  linear head.
* ``LinearBoW``: mean of token embeddings over unmasked positions (CLS
  included) into the same linear head.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass

import numpy as np

from offlang.nnet.loss import EPS, LossBatch, softmax, weighted_ce_loss

LN_EPS = 1e-5
INIT_STD = 0.02
_GELU_C = math.sqrt(2.0 / math.pi)

ModelParams = dict  # name -> float64 ndarray, insertion ordered


class ModelKind(str, enum.Enum):
    MINI_TRANSFORMER = "MiniTransformer"
    LINEAR_BOW = "LinearBoW"


@dataclass(frozen=True)
class ClassifierSpec:
    num_classes: int = 2
    kind: ModelKind = ModelKind.MINI_TRANSFORMER
    d_model: int = 64
    num_heads: int = 2
    num_layers: int = 2
    max_len: int = 64
    ffn_mult: int = 4
    dropout: float = 0.1

    def __post_init__(self):
        object.__setattr__(self, "kind", ModelKind(self.kind))
        if self.num_classes < 2:
            raise ValueError("num_classes must be at least 2")
        if self.d_model < 1 or self.num_heads < 1 or self.d_model % self.num_heads:
            raise ValueError(f"d_model={self.d_model} must be divisible by num_heads={self.num_heads}")
        if self.max_len < 2:
            raise ValueError("max_len must be at least 2")
        if self.num_layers < 0 or self.ffn_mult < 1:
            raise ValueError("num_layers must be >= 0 and ffn_mult >= 1")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must lie in [0, 1)")

    @property
    def head_dim(self) -> int:
        return self.d_model // self.num_heads

    def to_dict(self) -> dict:
        d = asdict(self)
        d["kind"] = self.kind.value
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ClassifierSpec":
        return cls(**d)


def param_shapes(spec: ClassifierSpec, vocab_size: int) -> dict[str, tuple[int, ...]]:
    D, C = spec.d_model, spec.num_classes
    shapes: dict[str, tuple[int, ...]] = {"tok_emb": (vocab_size, D)}
    if spec.kind is ModelKind.MINI_TRANSFORMER:
        F = spec.ffn_mult * D
        shapes["pos_emb"] = (spec.max_len, D)
        for i in range(spec.num_layers):
            p = f"layers.{i}."
            shapes.update({
                p + "ln1.g": (D,), p + "ln1.b": (D,),
                p + "wq": (D, D), p + "bq": (D,),
                p + "wk": (D, D), p + "bk": (D,),
                p + "wv": (D, D), p + "bv": (D,),
                p + "wo": (D, D), p + "bo": (D,),
                p + "ln2.g": (D,), p + "ln2.b": (D,),
                p + "w1": (D, F), p + "b1": (F,),
                p + "w2": (F, D), p + "b2": (D,),
            })
        shapes["lnf.g"] = (D,)
        shapes["lnf.b"] = (D,)
    shapes["head.w"] = (D, C)
    shapes["head.b"] = (C,)
    return shapes


def init_params(spec: ClassifierSpec, vocab_size: int, rng: np.random.Generator) -> ModelParams:
    """Weights ~ N(0, 0.02^2), biases 0, layer-norm gains 1."""
    params = {}
    for name, shape in param_shapes(spec, vocab_size).items():
        leaf = name.rsplit(".", 1)[-1]
        if leaf == "g":
            params[name] = np.ones(shape)
        elif leaf == "b" or (leaf.startswith("b") and len(shape) == 1):
            params[name] = np.zeros(shape)
        else:
            params[name] = rng.normal(0.0, INIT_STD, size=shape)
    return params


def check_params(params: ModelParams, spec: ClassifierSpec) -> None:
    vocab_size = params["tok_emb"].shape[0]
    expected = param_shapes(spec, vocab_size)
    if list(expected) != list(params):
        raise ValueError("parameter names do not match the classifier spec")
    for name, shape in expected.items():
        if params[name].shape != shape:
            raise ValueError(f"{name}: shape {params[name].shape}, expected {shape}")


# -- primitives ---------------------------------------------------------------

def _ln(x, g, b):
    mu = x.mean(-1, keepdims=True)
    xc = x - mu
    rstd = 1.0 / np.sqrt((xc * xc).mean(-1, keepdims=True) + LN_EPS)
    xhat = xc * rstd
    return xhat * g + b, (xhat, rstd)


def _ln_back(dy, g, cache):
    xhat, rstd = cache
    D = dy.shape[-1]
    dg = (dy * xhat).reshape(-1, D).sum(0)
    db = dy.reshape(-1, D).sum(0)
    dxh = dy * g
    dx = rstd * (dxh - dxh.mean(-1, keepdims=True) - xhat * (dxh * xhat).mean(-1, keepdims=True))
    return dx, dg, db


def _gelu(x):
    u = _GELU_C * (x + 0.044715 * (x * x * x))
    t = np.tanh(u)
    return 0.5 * x * (1.0 + t), t


def _gelu_back(dy, x, t):
    du = _GELU_C * (1.0 + 3 * 0.044715 * x * x)
    return dy * (0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * du)


def _dropout(x, p, rng):
    if rng is None or p == 0.0:
        return x, None
    keep = (rng.random(x.shape) >= p) / (1.0 - p)
    return x * keep, keep


def _linear_back(dy, x, w):
    """Grads of y = x @ w + b for x of shape (..., I)."""
    I, O = w.shape
    dw = x.reshape(-1, I).T @ dy.reshape(-1, O)
    db = dy.reshape(-1, O).sum(0)
    return dy @ w.T, dw, db


# -- forward ------------------------------------------------------------------

def _split_heads(x, H):
    B, L, D = x.shape
    return x.reshape(B, L, H, D // H).transpose(0, 2, 1, 3)


def _merge_heads(x):
    B, H, L, dh = x.shape
    return x.transpose(0, 2, 1, 3).reshape(B, L, H * dh)


def _forward(params, spec: ClassifierSpec, ids, mask, rng=None):
    ids = np.asarray(ids)
    mask = np.asarray(mask)
    if ids.ndim != 2 or ids.shape != mask.shape:
        raise ValueError(f"ids {ids.shape} and mask {mask.shape} must be equal 2-d shapes")
    if ids.shape[1] > spec.max_len:
        raise ValueError(f"sequence length {ids.shape[1]} exceeds max_len {spec.max_len}")
    if np.any(mask[:, 0] == 0):
        raise ValueError("position 0 (CLS) must be unmasked")
    if spec.kind is ModelKind.LINEAR_BOW:
        return _forward_bow(params, ids, mask)

    B, L = ids.shape
    H, p = spec.num_heads, spec.dropout
    scale = 1.0 / math.sqrt(spec.head_dim)
    keymask = mask.astype(bool)[:, None, None, :]

    x = params["tok_emb"][ids] + params["pos_emb"][:L]
    x, drop0 = _dropout(x, p, rng)
    layers = []
    for i in range(spec.num_layers):
        pre = f"layers.{i}."
        c = {}
        h, c["ln1"] = _ln(x, params[pre + "ln1.g"], params[pre + "ln1.b"])
        q = _split_heads(h @ params[pre + "wq"] + params[pre + "bq"], H)
        k = _split_heads(h @ params[pre + "wk"] + params[pre + "bk"], H)
        v = _split_heads(h @ params[pre + "wv"] + params[pre + "bv"], H)
        s = np.where(keymask, (q @ k.transpose(0, 1, 3, 2)) * scale, -np.inf)
        a = np.exp(s - s.max(-1, keepdims=True))
        a /= a.sum(-1, keepdims=True)
        ctx = _merge_heads(a @ v)
        attn, c["drop1"] = _dropout(ctx @ params[pre + "wo"] + params[pre + "bo"], p, rng)
        x = x + attn
        h2, c["ln2"] = _ln(x, params[pre + "ln2.g"], params[pre + "ln2.b"])
        f_pre = h2 @ params[pre + "w1"] + params[pre + "b1"]
        f_act, c["gelu_t"] = _gelu(f_pre)
        ffn, c["drop2"] = _dropout(f_act @ params[pre + "w2"] + params[pre + "b2"], p, rng)
        x = x + ffn
        c.update(h=h, q=q, k=k, v=v, a=a, ctx=ctx, h2=h2, f_pre=f_pre, f_act=f_act)
        layers.append(c)
    cls = x[:, 0, :]
    z, lnf = _ln(cls, params["lnf.g"], params["lnf.b"])
    logits = z @ params["head.w"] + params["head.b"]
    cache = dict(ids=ids, mask=mask, drop0=drop0, layers=layers, z=z, lnf=lnf, scale=scale)
    return logits, cache


def _forward_bow(params, ids, mask):
    m = mask.astype(np.float64)
    count = m.sum(1, keepdims=True)
    pooled = (params["tok_emb"][ids] * m[:, :, None]).sum(1) / count
    logits = pooled @ params["head.w"] + params["head.b"]
    return logits, dict(ids=ids, m=m, count=count, z=pooled)


def logits(params: ModelParams, spec: ClassifierSpec, ids, mask) -> np.ndarray:
    return _forward(params, spec, ids, mask)[0]


def forward(params: ModelParams, spec: ClassifierSpec, ids, mask) -> np.ndarray:
    """Inference-mode class probabilities, shape (batch, num_classes)."""
    return softmax(logits(params, spec, ids, mask))


def predict(params: ModelParams, spec: ClassifierSpec, ids, mask) -> np.ndarray:
    return predict_from_probs(forward(params, spec, ids, mask))


def predict_from_probs(probs) -> np.ndarray:
    # np.argmax returns the first maximum, i.e. the lowest class index on ties
    return np.argmax(np.asarray(probs), axis=-1)


# -- backward -----------------------------------------------------------------

def loss_and_grads(params: ModelParams, spec: ClassifierSpec, ids, mask, targets, weights=None, rng=None):
    """Weighted cross-entropy of the batch and its exact gradient for every parameter.

    `rng`, when given, enables dropout with masks drawn from it; the returned
    gradient is that of the same stochastic forward pass.
    """
    z_logits, cache = _forward(params, spec, ids, mask, rng)
    probs = softmax(z_logits)
    targets = np.asarray(targets, dtype=np.int64)
    B = len(targets)
    w = np.ones(B) if weights is None else np.asarray(weights, dtype=np.float64)[targets]
    loss = weighted_ce_loss(LossBatch(probs, targets, weights))
    py = probs[np.arange(B), targets]

    # d/dlogits of -log softmax_y is p - onehot(y); zero where the clamp is active
    active = (py >= EPS) & (py <= 1.0 - EPS)
    dlogits = probs.copy()
    dlogits[np.arange(B), targets] -= 1.0
    dlogits *= (w * active / B)[:, None]

    grads = {name: np.zeros_like(v) for name, v in params.items()}
    dz, grads["head.w"], grads["head.b"] = _linear_back(dlogits, cache["z"], params["head.w"])
    if spec.kind is ModelKind.LINEAR_BOW:
        demb = dz[:, None, :] * (cache["m"] / cache["count"])[:, :, None]
        np.add.at(grads["tok_emb"], cache["ids"].ravel(), demb.reshape(-1, demb.shape[-1]))
        return loss, grads

    dcls, grads["lnf.g"], grads["lnf.b"] = _ln_back(dz, params["lnf.g"], cache["lnf"])
    ids = cache["ids"]
    B, L = ids.shape
    dx = np.zeros((B, L, spec.d_model))
    dx[:, 0, :] = dcls
    scale = cache["scale"]
    for i in reversed(range(spec.num_layers)):
        pre = f"layers.{i}."
        c = cache["layers"][i]
        # feed-forward branch
        dffn = dx if c["drop2"] is None else dx * c["drop2"]
        dact, grads[pre + "w2"], grads[pre + "b2"] = _linear_back(dffn, c["f_act"], params[pre + "w2"])
        dfpre = _gelu_back(dact, c["f_pre"], c["gelu_t"])
        dh2, grads[pre + "w1"], grads[pre + "b1"] = _linear_back(dfpre, c["h2"], params[pre + "w1"])
        dln2, grads[pre + "ln2.g"], grads[pre + "ln2.b"] = _ln_back(dh2, params[pre + "ln2.g"], c["ln2"])
        dx = dx + dln2
        # attention branch
        dattn = dx if c["drop1"] is None else dx * c["drop1"]
        dctx, grads[pre + "wo"], grads[pre + "bo"] = _linear_back(dattn, c["ctx"], params[pre + "wo"])
        dctx = _split_heads(dctx, spec.num_heads)
        a, q, k, v = c["a"], c["q"], c["k"], c["v"]
        da = dctx @ v.transpose(0, 1, 3, 2)
        dv = a.transpose(0, 1, 3, 2) @ dctx
        ds = a * (da - (da * a).sum(-1, keepdims=True)) * scale
        dq = ds @ k
        dk = ds.transpose(0, 1, 3, 2) @ q
        dh = np.zeros_like(dx)
        for name, dproj in (("q", dq), ("k", dk), ("v", dv)):
            dh_part, grads[pre + "w" + name], grads[pre + "b" + name] = _linear_back(
                _merge_heads(dproj), c["h"], params[pre + "w" + name]
            )
            dh += dh_part
        dln1, grads[pre + "ln1.g"], grads[pre + "ln1.b"] = _ln_back(dh, params[pre + "ln1.g"], c["ln1"])
        dx = dx + dln1
    if cache["drop0"] is not None:
        dx = dx * cache["drop0"]
    grads["pos_emb"][:L] = dx.sum(0)
    np.add.at(grads["tok_emb"], ids.ravel(), dx.reshape(-1, spec.d_model))
    return loss, grads


def gradients(params: ModelParams, spec: ClassifierSpec, ids, mask, targets, weights=None) -> ModelParams:
    """Gradient of the inference-mode (dropout-free) weighted loss."""
    return loss_and_grads(params, spec, ids, mask, targets, weights)[1]
