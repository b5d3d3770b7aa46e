"""Reader/writer for the portable binary matrix container.

This is the bridge's own implementation of the wire format (magic
``OFAT``, version 1, u64 row/col counts, dtype code 1 = float32,
little-endian row-major payload). The bridge deliberately does not
import the pipeline package: the file format is the contract between
the two sides.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"OFAT"
VERSION = 1
DTYPE_F32 = 1
_HEADER = struct.Struct("<4sIQQB")


def write_matrix(matrix: np.ndarray, path) -> None:
    m = np.ascontiguousarray(matrix, dtype=np.float32)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {m.shape}")
    if not np.isfinite(m).all():
        raise ValueError("matrix contains non-finite values")
    with open(path, "wb") as f:
        f.write(_HEADER.pack(MAGIC, VERSION, m.shape[0], m.shape[1], DTYPE_F32))
        m.astype("<f4", copy=False).tofile(f)


def read_matrix(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError(f"{path}: truncated header")
    magic, version, rows, cols, dtype_code = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    if version != VERSION or dtype_code != DTYPE_F32:
        raise ValueError(f"{path}: unsupported version/dtype ({version}, {dtype_code})")
    if len(raw) - _HEADER.size != rows * cols * 4:
        raise ValueError(f"{path}: payload length does not match header")
    m = np.frombuffer(raw, dtype="<f4", count=rows * cols, offset=_HEADER.size)
    m = m.reshape(rows, cols)
    if not np.isfinite(m).all():
        raise ValueError(f"{path}: non-finite values")
    return np.ascontiguousarray(m, dtype=np.float32)
