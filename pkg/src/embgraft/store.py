"""In-memory matrix/vocabulary types and their on-disk formats.

Matrices travel as little-endian float32 in a small binary container
(magic ``OFAT``), vocabularies as one UTF-8 token per line, and word
vectors in the usual ``.vec`` text layout (header ``N dim``, then one
``word v1 ... vdim`` row per word). Every loader validates shape and
rejects non-finite values, so downstream numeric code never sees
NaN/Inf. Line numbers in error messages are 0-based.

Binary matrix container layout (25-byte header, then payload)::

    magic       4 bytes   b"OFAT"
    version     u32 LE    1
    rows        u64 LE
    cols        u64 LE
    dtype code  u8        1 = float32
    payload     rows*cols little-endian float32, row-major

All returned arrays are marked read-only; the types here are meant to be
shared freely across threads after construction.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MAGIC = b"OFAT"
FORMAT_VERSION = 1
DTYPE_F32 = 1
_HEADER = struct.Struct("<4sIQQB")
HEADER_SIZE = _HEADER.size  # 25


class MatrixFormatError(ValueError):
    """A matrix file violates the binary container format."""


def payload_nbytes(rows: int, cols: int) -> int:
    """Byte length of the float32 payload a (rows, cols) header declares."""
    return rows * cols * 4


def as_matrix(values) -> np.ndarray:
    """Coerce to a C-contiguous 2-D float32 array, rejecting non-finite values."""
    m = np.ascontiguousarray(values, dtype=np.float32)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {m.shape}")
    if not np.isfinite(m).all():
        raise ValueError("matrix contains non-finite values")
    return m


def matrix_to_bytes(matrix) -> bytes:
    """Full container bytes (header + payload) for a matrix."""
    m = as_matrix(matrix)
    header = _HEADER.pack(MAGIC, FORMAT_VERSION, m.shape[0], m.shape[1], DTYPE_F32)
    return header + m.astype("<f4", copy=False).tobytes(order="C")


def save_matrix(matrix, path) -> None:
    m = as_matrix(matrix)
    with open(path, "wb") as f:
        f.write(_HEADER.pack(MAGIC, FORMAT_VERSION, m.shape[0], m.shape[1], DTYPE_F32))
        # astype('<f4') pins the on-disk byte order regardless of host
        m.astype("<f4", copy=False).tofile(f)


def load_matrix(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if len(raw) < HEADER_SIZE:
        raise MatrixFormatError(
            f"{path}: truncated header ({len(raw)} of {HEADER_SIZE} bytes)"
        )
    magic, version, rows, cols, dtype_code = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise MatrixFormatError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    if version != FORMAT_VERSION:
        raise MatrixFormatError(f"{path}: unsupported format version {version}")
    if dtype_code != DTYPE_F32:
        raise MatrixFormatError(f"{path}: unsupported dtype code {dtype_code}")
    expected = payload_nbytes(rows, cols)
    actual = len(raw) - HEADER_SIZE
    if actual != expected:
        raise MatrixFormatError(
            f"{path}: payload is {actual} bytes but header declares {expected}; "
            f"file ends at byte offset {len(raw)}"
        )
    m = np.frombuffer(raw, dtype="<f4", count=rows * cols, offset=HEADER_SIZE)
    m = m.reshape(rows, cols)
    bad = np.flatnonzero(~np.isfinite(m))
    if bad.size:
        offset = HEADER_SIZE + int(bad[0]) * 4
        raise MatrixFormatError(f"{path}: non-finite value at byte offset {offset}")
    m = np.ascontiguousarray(m, dtype=np.float32)
    m.flags.writeable = False
    return m


class Vocabulary:
    """Ordered list of unique tokens with a token -> position index."""

    __slots__ = ("tokens", "index")

    def __init__(self, tokens):
        self.tokens: tuple[str, ...] = tuple(tokens)
        index: dict[str, int] = {}
        for pos, tok in enumerate(self.tokens):
            if tok in index:
                raise ValueError(
                    f"duplicate token {tok!r} at positions {index[tok]} and {pos}"
                )
            index[tok] = pos
        self.index = index

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token) -> bool:
        return token in self.index

    def __getitem__(self, pos: int) -> str:
        return self.tokens[pos]

    def __iter__(self):
        return iter(self.tokens)

    def __eq__(self, other) -> bool:
        return isinstance(other, Vocabulary) and self.tokens == other.tokens

    def __repr__(self) -> str:
        return f"Vocabulary({len(self.tokens)} tokens)"


def load_vocab(path) -> Vocabulary:
    """One token per line; line i (0-based) becomes position i."""
    text = Path(path).read_text(encoding="utf-8")
    if text.endswith("\n"):
        text = text[:-1]
    lines = text.split("\n") if text else []
    seen: dict[str, int] = {}
    for lineno, tok in enumerate(lines):
        if tok in seen:
            raise ValueError(
                f"{path}: duplicate token {tok!r} on lines {seen[tok]} and {lineno}"
            )
        seen[tok] = lineno
    return Vocabulary(lines)


def save_vocab(vocab: Vocabulary, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for tok in vocab.tokens:
            f.write(tok)
            f.write("\n")


@dataclass(frozen=True)
class WordVectors:
    """External word vectors: one row of `matrix` per entry of `vocab`."""

    vocab: Vocabulary
    matrix: np.ndarray

    def __post_init__(self):
        if self.matrix.shape[0] != len(self.vocab):
            raise ValueError(
                f"matrix has {self.matrix.shape[0]} rows for {len(self.vocab)} words"
            )

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]


def load_word_vectors(path) -> WordVectors:
    """Parse the ``.vec`` text format: header "N dim", then N word rows."""
    with open(path, encoding="utf-8") as f:
        header = f.readline()
        parts = header.split()
        if len(parts) != 2:
            raise ValueError(f"{path} line 0: malformed header {header.strip()!r}")
        try:
            count, dim = int(parts[0]), int(parts[1])
        except ValueError:
            raise ValueError(
                f"{path} line 0: header must be two integers, got {header.strip()!r}"
            ) from None
        if count < 0 or dim < 0:
            raise ValueError(f"{path} line 0: negative header values")
        words: list[str] = []
        seen: dict[str, int] = {}
        matrix = np.empty((count, dim), dtype=np.float32)
        for i in range(count):
            line = f.readline()
            if not line:
                raise ValueError(
                    f"{path}: header declares {count} rows but file ends after {i}"
                )
            fields = line.rstrip("\n").split(" ")
            # tolerate one trailing space per row (common in .vec exports)
            if len(fields) > 1 and fields[-1] == "":
                fields = fields[:-1]
            word, values = fields[0], fields[1:]
            if len(values) != dim:
                raise ValueError(
                    f"{path} line {i + 1}: {len(values)} values for {word!r}, "
                    f"header declares {dim}"
                )
            if word in seen:
                raise ValueError(
                    f"{path} line {i + 1}: duplicate word {word!r} "
                    f"(first on line {seen[word] + 1})"
                )
            seen[word] = i
            try:
                matrix[i] = np.asarray(values, dtype=np.float64)
            except ValueError:
                raise ValueError(
                    f"{path} line {i + 1}: unparsable float for {word!r}"
                ) from None
            words.append(word)
        trailing = f.readline()
        if trailing.strip():
            raise ValueError(f"{path}: more rows than the header's {count}")
    bad_rows = np.flatnonzero(~np.isfinite(matrix).all(axis=1))
    if bad_rows.size:
        raise ValueError(f"{path} line {int(bad_rows[0]) + 1}: non-finite value")
    matrix.flags.writeable = False
    return WordVectors(vocab=Vocabulary(words), matrix=matrix)


def save_word_vectors(wv: WordVectors, path) -> None:
    """Write the ``.vec`` text format; 9 significant digits round-trip float32."""
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"{len(wv.vocab)} {wv.dim}\n")
        for word, row in zip(wv.vocab.tokens, wv.matrix):
            f.write(word)
            for v in row:
                f.write(f" {float(v):.9g}")
            f.write("\n")
