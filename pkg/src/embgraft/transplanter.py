"""Initialize target coordinates from source coordinates.

Every target token is handled by exactly one of three routes, in fixed
priority order:

1. copied      -- the token exists verbatim in the source vocabulary;
                  its coordinate row is copied bit for bit.
2. similarity  -- the token has a usable subword vector; its coordinate
                  is a temperature-softmax convex combination of the
                  coordinates of the k most cosine-similar source
                  subwords (measured in the shared word-vector space).
3. random      -- everything else; an elementwise Gaussian draw matched
                  to the per-dimension mean/variance of the source
                  coordinates, keyed by (seed, target row) so results do
                  not depend on evaluation order or thread count.

Similarity candidates are the source subwords whose vectors are covered
and have nonzero norm; cosine against a zero vector is undefined, so
uncovered rows never attract neighbors.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import rng
from .store import Vocabulary, as_matrix
from .subword_space import SubwordVectors

COPIED = "copied"
SIMILARITY = "similarity"
RANDOM = "random"

# fixed work unit for the blocked similarity search; independent of the
# thread count so outputs never depend on parallelism
_BLOCK_ROWS = 512


@dataclass(frozen=True)
class TransplantConfig:
    k: int = 10
    tau: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if not self.tau > 0:
            raise ValueError(f"tau must be > 0, got {self.tau}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")


@dataclass(frozen=True)
class SourceStats:
    """Per-dimension mean and population variance of the source coordinates."""

    mean: np.ndarray  # float64
    var: np.ndarray   # float64, ddof=0


@dataclass(frozen=True)
class TokenProvenance:
    token: str
    mode: str
    # (source token, weight) pairs; similarity mode only
    neighbors: tuple[tuple[str, float], ...] = ()


@dataclass(frozen=True)
class TransplantReport:
    n_copied: int
    n_similarity: int
    n_random: int
    provenance: tuple[TokenProvenance, ...]  # one entry per target token, in order

    @property
    def total(self) -> int:
        return self.n_copied + self.n_similarity + self.n_random

    @property
    def coverage(self) -> float:
        return (self.n_copied + self.n_similarity) / self.total if self.total else 0.0

    def as_dict(self, include_provenance: bool = False) -> dict:
        out = {
            "counts": {
                "copied": self.n_copied,
                "similarity": self.n_similarity,
                "random": self.n_random,
                "total": self.total,
            },
            "coverage": self.coverage,
        }
        if include_provenance:
            records = []
            for p in self.provenance:
                rec = {"token": p.token, "mode": p.mode}
                if p.mode == SIMILARITY:
                    rec["neighbors"] = [
                        {"token": t, "weight": w} for t, w in p.neighbors
                    ]
                records.append(rec)
            out["provenance"] = records
        return out


def partition_vocab(src: Vocabulary, tgt: Vocabulary):
    """Split target positions into exact string matches and the rest.

    Returns (shared, new): shared as (target_pos, source_pos) pairs, both
    lists ascending in target position.
    """
    src_index = src.index
    shared: list[tuple[int, int]] = []
    new: list[int] = []
    for t_pos, token in enumerate(tgt.tokens):
        s_pos = src_index.get(token)
        if s_pos is None:
            new.append(t_pos)
        else:
            shared.append((t_pos, s_pos))
    return shared, new


def compute_source_stats(coords) -> SourceStats:
    m = as_matrix(coords)
    if m.shape[0] < 2:
        raise ValueError(f"need at least 2 source rows for statistics, got {m.shape[0]}")
    wide = m.astype(np.float64)
    return SourceStats(mean=wide.mean(axis=0), var=wide.var(axis=0))


def _candidate_pool(source_subwords: SubwordVectors):
    """Source rows eligible as neighbors: covered with nonzero norm.

    Returns (positions, unit_rows) with unit_rows float64-normalized.
    """
    vectors = source_subwords.matrix.astype(np.float64)
    norms = np.linalg.norm(vectors, axis=1)
    positions = np.flatnonzero(source_subwords.covered & (norms > 0.0))
    unit = vectors[positions] / norms[positions, None]
    return positions, unit


def _top_k(sims: np.ndarray, k: int) -> np.ndarray:
    """Positions of the k largest values, ordered by (-value, position).

    Ties at the boundary go to the smallest position, so selection is
    deterministic and data-independent.
    """
    n = sims.size
    if k >= n:
        chosen = np.arange(n)
    else:
        kth = np.partition(sims, n - k)[n - k]
        greater = np.flatnonzero(sims > kth)
        need = k - greater.size
        equal = np.flatnonzero(sims == kth)[:need]
        chosen = np.concatenate([greater, equal])
    order = np.lexsort((chosen, -sims[chosen]))
    return chosen[order]


def _softmax(scores: np.ndarray) -> np.ndarray:
    # max-shift keeps exp() in range even for tiny temperatures
    e = np.exp(scores - scores.max())
    return e / e.sum()


def neighbor_weights(vector, source_subwords: SubwordVectors,
                     config: TransplantConfig) -> list[tuple[int, float]]:
    """Top-k cosine neighbors of one query vector with softmax weights.

    Returns (source position, weight) pairs ordered by descending
    similarity; fewer than k candidates means all of them are used. An
    empty list signals the caller to use the Gaussian fallback.
    """
    y = np.asarray(vector, dtype=np.float64)
    norm = np.linalg.norm(y)
    if not norm > 0:
        raise ValueError("query vector must have nonzero norm")
    positions, unit = _candidate_pool(source_subwords)
    if positions.size == 0:
        return []
    sims = unit @ (y / norm)
    chosen = _top_k(sims, config.k)
    weights = _softmax(sims[chosen] / config.tau)
    return [(int(positions[c]), float(w)) for c, w in zip(chosen, weights)]


def transplant(source_coords, source_subwords: SubwordVectors,
               target_subwords: SubwordVectors, source_vocab: Vocabulary,
               target_vocab: Vocabulary, config: TransplantConfig,
               threads: int = 1):
    """Build target coordinates; returns (matrix, TransplantReport).

    The similarity search is exact: blocked normalized dot products
    against every candidate, no approximate index. Blocks are a fixed
    size and every fallback draw is keyed by (seed, target row), so the
    result is identical for any `threads`.
    """
    coords = as_matrix(source_coords)
    if len(source_vocab) == 0:
        raise ValueError("source vocabulary is empty")
    if coords.shape[0] != len(source_vocab):
        raise ValueError(
            f"source coords have {coords.shape[0]} rows for "
            f"{len(source_vocab)} source tokens"
        )
    if source_subwords.vocab.tokens != source_vocab.tokens:
        raise ValueError("source subword vectors are not aligned to the source vocabulary")
    if target_subwords.vocab.tokens != target_vocab.tokens:
        raise ValueError("target subword vectors are not aligned to the target vocabulary")
    if source_subwords.dim != target_subwords.dim:
        raise ValueError(
            f"word-vector dimensions differ: source {source_subwords.dim}, "
            f"target {target_subwords.dim}"
        )

    latent = coords.shape[1]
    n_tgt = len(target_vocab)
    out = np.zeros((n_tgt, latent), dtype=np.float32)
    provenance: list[TokenProvenance | None] = [None] * n_tgt

    shared, new_positions = partition_vocab(source_vocab, target_vocab)
    for t_pos, s_pos in shared:
        out[t_pos] = coords[s_pos]
        provenance[t_pos] = TokenProvenance(target_vocab[t_pos], COPIED)

    cand_pos, cand_unit = _candidate_pool(source_subwords)
    tgt_vectors = target_subwords.matrix.astype(np.float64)
    tgt_norms = np.linalg.norm(tgt_vectors, axis=1)

    new_arr = np.asarray(new_positions, dtype=np.int64)
    if new_arr.size and cand_pos.size:
        usable = target_subwords.covered[new_arr] & (tgt_norms[new_arr] > 0.0)
        eligible, fallback = new_arr[usable], new_arr[~usable]
    else:
        eligible, fallback = np.empty(0, dtype=np.int64), new_arr

    coords64 = coords.astype(np.float64)
    src_tokens = source_vocab.tokens

    def run_block(block: np.ndarray) -> None:
        queries = tgt_vectors[block] / tgt_norms[block, None]
        sims = queries @ cand_unit.T
        for r, t_pos in enumerate(block):
            chosen = _top_k(sims[r], config.k)
            weights = _softmax(sims[r][chosen] / config.tau)
            neighbors = cand_pos[chosen]
            out[t_pos] = weights @ coords64[neighbors]
            provenance[t_pos] = TokenProvenance(
                target_vocab[t_pos], SIMILARITY,
                tuple((src_tokens[s], float(w)) for s, w in zip(neighbors, weights)),
            )

    blocks = [eligible[i:i + _BLOCK_ROWS] for i in range(0, eligible.size, _BLOCK_ROWS)]
    if threads > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(run_block, blocks))
    else:
        for block in blocks:
            run_block(block)

    if fallback.size:
        stats = compute_source_stats(coords)
        std = np.sqrt(stats.var)
        for t_pos in fallback:
            out[t_pos] = rng.gaussian_row(config.seed, int(t_pos), stats.mean, std)
            provenance[t_pos] = TokenProvenance(target_vocab[t_pos], RANDOM)

    report = TransplantReport(
        n_copied=len(shared),
        n_similarity=int(eligible.size),
        n_random=int(fallback.size),
        provenance=tuple(provenance),
    )
    out.flags.writeable = False
    return out, report
