import numpy as np
import pytest

from offlang.nnet.checkpoint import Checkpoint, CheckpointError, from_bytes, load_checkpoint, save_checkpoint, to_bytes
from offlang.nnet.model import ClassifierSpec, init_params
from offlang.nnet.vocab import build_vocab


@pytest.fixture
def ckpt():
    spec = ClassifierSpec(d_model=8, num_heads=2, num_layers=1, max_len=12)
    vocab = build_vocab(["नमस्ते दुनिया", "hello world"], 50)
    params = init_params(spec, len(vocab), np.random.default_rng(0))
    params["head.b"][0] = np.nextafter(0.1, 1.0)
    return Checkpoint(spec, vocab, params, {"scheme": "binary", "weights": [1.4318181818181819, 0.7682926829268293]})


def test_round_trip_is_bit_exact(ckpt, tmp_path):
    path = save_checkpoint(tmp_path / "m.olk", ckpt)
    back = load_checkpoint(path)
    assert back.spec == ckpt.spec and back.vocab == ckpt.vocab and back.meta == ckpt.meta
    for k, v in ckpt.params.items():
        assert back.params[k].tobytes() == v.tobytes()
    assert to_bytes(back) == path.read_bytes()


def test_layout(ckpt):
    buf = to_bytes(ckpt)
    assert buf[:4] == b"OLK1"
    hlen = int.from_bytes(buf[4:12], "little")
    n_floats = sum(v.size for v in ckpt.params.values())
    assert len(buf) == 12 + hlen + 8 * n_floats


def test_bad_magic(ckpt):
    with pytest.raises(CheckpointError, match="magic"):
        from_bytes(b"XXXX" + to_bytes(ckpt)[4:])


def test_truncated(ckpt):
    with pytest.raises(CheckpointError):
        from_bytes(to_bytes(ckpt)[:-8])
