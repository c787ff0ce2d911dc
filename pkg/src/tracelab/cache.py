"""Binary cache files.

Context file (``.tlff``), little-endian::

    b"TLFF" | u8 version | u64 p | u64 g | p x u32 dlog   (dlog[0] = 0xFFFFFFFF)

Weight-table file (``.tlwt``)::

    b"TLWT" | u8 version | u64 p | u64 spec_hash | p x (f64 re, f64 im)
"""

from __future__ import annotations

import os
import struct
from pathlib import Path

import numpy as np

from .errors import ValidationError

CTX_MAGIC = b"TLFF"
TABLE_MAGIC = b"TLWT"
VERSION = 1
_HEADER = struct.Struct("<4sBQQ")


def cache_dir_from_env() -> Path:
    return Path(os.environ.get("TRACELAB_CACHE", "./.tracelab-cache"))


def _atomic_write(path: Path, header: bytes, body: np.ndarray) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + f".tmp{os.getpid()}")
    with open(tmp, "wb") as fh:
        fh.write(header)
        fh.write(body.tobytes())
    os.replace(tmp, path)


def save_context(ctx, path: str | os.PathLike) -> None:
    dlog = ctx.dlog.astype("<u4")  # -1 wraps to 0xFFFFFFFF
    _atomic_write(Path(path), _HEADER.pack(CTX_MAGIC, VERSION, ctx.p, ctx.g), dlog)


def load_context(path: str | os.PathLike):
    from .ffield import context_from_dlog

    raw = Path(path).read_bytes()
    magic, version, p, g = _HEADER.unpack_from(raw)
    if magic != CTX_MAGIC or version != VERSION:
        raise ValidationError(f"{path}: not a TLFF v{VERSION} file")
    if len(raw) < _HEADER.size + 4 * p:
        raise ValidationError(f"{path}: truncated dlog table")
    dlog = np.frombuffer(raw, dtype="<u4", count=p, offset=_HEADER.size)
    return context_from_dlog(p, g, dlog.astype(np.int64))


def save_table_values(path: str | os.PathLike, p: int, spec_hash: int, values: np.ndarray) -> None:
    body = np.ascontiguousarray(values, dtype="<c16")
    _atomic_write(Path(path), _HEADER.pack(TABLE_MAGIC, VERSION, p, spec_hash), body)


def load_table_values(path: str | os.PathLike):
    """Returns ``(p, spec_hash, values)``."""
    raw = Path(path).read_bytes()
    magic, version, p, spec_hash = _HEADER.unpack_from(raw)
    if magic != TABLE_MAGIC or version != VERSION:
        raise ValidationError(f"{path}: not a TLWT v{VERSION} file")
    if len(raw) < _HEADER.size + 16 * p:
        raise ValidationError(f"{path}: truncated value table")
    values = np.frombuffer(raw, dtype="<c16", count=p, offset=_HEADER.size).copy()
    return p, spec_hash, values
