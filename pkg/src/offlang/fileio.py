from __future__ import annotations

import hashlib
import os
import tempfile
from pathlib import Path

DATA_DIR_ENV = "OFFLANG_DATA_DIR"


def atomic_write_bytes(path: str | Path, data: bytes) -> Path:
    """Write via a temp file in the target directory, then rename over `path`."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def atomic_write_text(path: str | Path, text: str) -> Path:
    return atomic_write_bytes(path, text.encode("utf-8"))


def sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def resolve_data_path(path: str | Path) -> Path:
    """Relative paths that don't exist under the cwd are looked up under $OFFLANG_DATA_DIR."""
    p = Path(path)
    if p.is_absolute() or p.exists():
        return p
    root = os.environ.get(DATA_DIR_ENV)
    if root and (Path(root) / p).exists():
        return Path(root) / p
    return p
