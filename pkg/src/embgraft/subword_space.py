"""Subword vectors averaged from the word vectors that contain them.

Segmenting every external word induces a bipartite word/subword graph;
a subword's vector is the arithmetic mean of the word vectors of its
graph neighbors. Subwords no word segmentation touches stay at exactly
zero and are flagged uncovered.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import store
from .segmenter import Segmenter
from .store import Vocabulary, WordVectors


@dataclass(frozen=True)
class SubwordOccurrenceIndex:
    """For each subword position, the word positions whose segmentation
    contains it (unique, ascending)."""

    neighbors: tuple[np.ndarray, ...]

    def __len__(self) -> int:
        return len(self.neighbors)

    def degree(self, subword_pos: int) -> int:
        return int(self.neighbors[subword_pos].size)


@dataclass(frozen=True)
class SubwordVectors:
    """Per-subword vectors in the word-vector space.

    Rows with ``covered[i] == False`` are exactly zero: no word's
    segmentation contains that subword.
    """

    vocab: Vocabulary
    matrix: np.ndarray
    covered: np.ndarray

    def __post_init__(self):
        if self.matrix.shape[0] != len(self.vocab):
            raise ValueError(
                f"matrix has {self.matrix.shape[0]} rows for {len(self.vocab)} subwords"
            )
        if self.covered.shape != (len(self.vocab),):
            raise ValueError("covered flags must have one entry per subword")

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]


def build_occurrence_index(words: WordVectors, seg: Segmenter,
                           subvocab: Vocabulary) -> SubwordOccurrenceIndex:
    """Segment every word and record which subwords it touches.

    A word contributes at most once per subword even when a piece repeats
    inside its segmentation: neighbor lists are sets of graph edges.
    """
    lists: list[list[int]] = [[] for _ in range(len(subvocab))]
    lookup = subvocab.index
    for word_pos, word in enumerate(words.vocab.tokens):
        for piece in set(seg.segment(word)):
            sub = lookup.get(piece)
            if sub is not None:
                lists[sub].append(word_pos)
    # word_pos arrives in ascending order; sorted() is a cheap guarantee
    neighbors = tuple(np.asarray(sorted(l), dtype=np.int64) for l in lists)
    return SubwordOccurrenceIndex(neighbors=neighbors)


def build_subword_vectors(index: SubwordOccurrenceIndex, words: WordVectors,
                          subvocab: Vocabulary) -> SubwordVectors:
    """Mean of neighbor word vectors per subword; zero row when uncovered.

    Accumulation runs in float64 over the ascending neighbor order, then
    rounds once to float32, so results do not depend on how the build is
    sharded.
    """
    if len(index) != len(subvocab):
        raise ValueError(
            f"index has {len(index)} subwords, vocabulary has {len(subvocab)}"
        )
    matrix = np.zeros((len(subvocab), words.dim), dtype=np.float32)
    covered = np.zeros(len(subvocab), dtype=bool)
    word_matrix = words.matrix
    for pos, nbrs in enumerate(index.neighbors):
        if nbrs.size == 0:
            continue
        if nbrs.min() < 0 or nbrs.max() >= word_matrix.shape[0]:
            raise ValueError(f"subword {pos}: neighbor index out of range")
        acc = word_matrix[nbrs].astype(np.float64).sum(axis=0)
        matrix[pos] = (acc / nbrs.size).astype(np.float32)
        covered[pos] = True
    matrix.flags.writeable = False
    covered.flags.writeable = False
    return SubwordVectors(vocab=subvocab, matrix=matrix, covered=covered)


def coverage_path_for(matrix_path) -> Path:
    """Sidecar path convention: u.ofat -> u.coverage."""
    return Path(matrix_path).with_suffix(".coverage")


def save_subword_vectors(sv: SubwordVectors, matrix_path, coverage_path=None) -> None:
    """Matrix in the binary container plus a 0/1-per-line coverage sidecar."""
    if coverage_path is None:
        coverage_path = coverage_path_for(matrix_path)
    store.save_matrix(sv.matrix, matrix_path)
    with open(coverage_path, "w", encoding="utf-8") as f:
        for flag in sv.covered:
            f.write("1\n" if flag else "0\n")


def load_subword_vectors(matrix_path, vocab: Vocabulary,
                         coverage_path=None) -> SubwordVectors:
    if coverage_path is None:
        coverage_path = coverage_path_for(matrix_path)
    matrix = store.load_matrix(matrix_path)
    lines = Path(coverage_path).read_text(encoding="utf-8").split()
    if len(lines) != matrix.shape[0]:
        raise ValueError(
            f"{coverage_path}: {len(lines)} flags for {matrix.shape[0]} rows"
        )
    bad = [v for v in lines if v not in ("0", "1")]
    if bad:
        raise ValueError(f"{coverage_path}: flags must be 0 or 1, got {bad[0]!r}")
    covered = np.array([v == "1" for v in lines], dtype=bool)
    uncovered_nonzero = np.flatnonzero(~covered & np.any(matrix != 0.0, axis=1))
    if uncovered_nonzero.size:
        raise ValueError(
            f"{matrix_path}: row {int(uncovered_nonzero[0])} marked uncovered "
            "but is not all-zero"
        )
    covered.flags.writeable = False
    return SubwordVectors(vocab=vocab, matrix=matrix, covered=covered)
