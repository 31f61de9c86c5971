"""``OLK1`` checkpoint container.

Layout (all integers little-endian)::

    b"OLK1"
    u64  header length in bytes
    ...  UTF-8 JSON header: spec, vocab, metadata, and for each tensor its
         name, shape and byte offset into the data section
    ...  tensor data, float64 little-endian, C order, in header order

The header is written with sorted keys and no whitespace, so identical
models serialize to identical bytes.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from offlang.fileio import atomic_write_bytes
from offlang.nnet.model import ClassifierSpec, ModelParams, check_params
from offlang.nnet.vocab import Vocab

MAGIC = b"OLK1"
FORMAT_VERSION = 1
_LEN = struct.Struct("<Q")


class CheckpointError(ValueError):
    pass


@dataclass
class Checkpoint:
    spec: ClassifierSpec
    vocab: Vocab
    params: ModelParams
    meta: dict = field(default_factory=dict)


def to_bytes(ckpt: Checkpoint) -> bytes:
    check_params(ckpt.params, ckpt.spec)
    tensors = []
    chunks = []
    offset = 0
    for name, arr in ckpt.params.items():
        data = np.ascontiguousarray(arr, dtype="<f8").tobytes()
        tensors.append({"name": name, "shape": list(arr.shape), "offset": offset})
        chunks.append(data)
        offset += len(data)
    header = {
        "format_version": FORMAT_VERSION,
        "spec": ckpt.spec.to_dict(),
        "vocab": {"tokens": list(ckpt.vocab.tokens), "max_size": ckpt.vocab.max_size},
        "meta": ckpt.meta,
        "tensors": tensors,
        "data_bytes": offset,
    }
    hbytes = json.dumps(header, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8")
    return MAGIC + _LEN.pack(len(hbytes)) + hbytes + b"".join(chunks)


def from_bytes(buf: bytes) -> Checkpoint:
    if buf[:4] != MAGIC:
        raise CheckpointError("not an OLK1 checkpoint (bad magic bytes)")
    if len(buf) < 4 + _LEN.size:
        raise CheckpointError("truncated checkpoint header")
    (hlen,) = _LEN.unpack_from(buf, 4)
    start = 4 + _LEN.size
    try:
        header = json.loads(buf[start : start + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"corrupt checkpoint header: {exc}") from None
    if header.get("format_version") != FORMAT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {header.get('format_version')}")
    data = memoryview(buf)[start + hlen :]
    if len(data) != header["data_bytes"]:
        raise CheckpointError(f"expected {header['data_bytes']} data bytes, found {len(data)}")
    params = {}
    for t in header["tensors"]:
        n = int(np.prod(t["shape"], dtype=np.int64))
        arr = np.frombuffer(data, dtype="<f8", count=n, offset=t["offset"])
        params[t["name"]] = arr.astype(np.float64).reshape(t["shape"])
    spec = ClassifierSpec.from_dict(header["spec"])
    vocab = Vocab(tuple(header["vocab"]["tokens"]), header["vocab"]["max_size"])
    check_params(params, spec)
    return Checkpoint(spec, vocab, params, header["meta"])


def save_checkpoint(path: str | Path, ckpt: Checkpoint) -> Path:
    return atomic_write_bytes(path, to_bytes(ckpt))


def load_checkpoint(path: str | Path) -> Checkpoint:
    return from_bytes(Path(path).read_bytes())
