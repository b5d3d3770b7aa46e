"""Random transplant instances for oracle-equivalence testing."""

from __future__ import annotations

import numpy as np

from embgraft.store import Vocabulary
from embgraft.subword_space import SubwordVectors
from embgraft.transplanter import TransplantConfig


def subword_vectors(vocab, matrix, covered):
    matrix = np.ascontiguousarray(matrix, dtype=np.float32)
    covered = np.asarray(covered, dtype=bool)
    matrix[~covered] = 0.0  # uncovered rows are zero by contract
    matrix.flags.writeable = False
    covered.flags.writeable = False
    return SubwordVectors(vocab=vocab, matrix=matrix, covered=covered)


def make_instance(rng: np.random.Generator, max_vocab=50, max_dw=8, max_latent=8):
    """One random transplant problem plus its config.

    Exercises every route: shared tokens, similarity-eligible tokens,
    uncovered/zero target vectors, uncovered/zero candidate rows, and
    occasionally a candidate-free source side.
    """
    n_src = int(rng.integers(2, max_vocab + 1))
    n_tgt = int(rng.integers(1, max_vocab + 1))
    d_w = int(rng.integers(1, max_dw + 1))
    latent = int(rng.integers(1, max_latent + 1))

    src_tokens = [f"s{i}" for i in range(n_src)]
    n_shared = int(rng.integers(0, min(n_src, n_tgt) + 1))
    shared = list(rng.choice(n_src, size=n_shared, replace=False))
    tgt_tokens = [src_tokens[i] for i in shared]
    tgt_tokens += [f"t{i}" for i in range(n_tgt - n_shared)]
    order = rng.permutation(len(tgt_tokens))
    tgt_tokens = [tgt_tokens[i] for i in order]

    src_vocab = Vocabulary(src_tokens)
    tgt_vocab = Vocabulary(tgt_tokens)

    coords = rng.standard_normal((n_src, latent)).astype(np.float32)

    no_candidates = rng.random() < 0.08
    if no_candidates:
        src_covered = np.zeros(n_src, dtype=bool)
    else:
        src_covered = rng.random(n_src) < 0.8
    src_matrix = rng.standard_normal((n_src, d_w))
    zero_rows = rng.random(n_src) < 0.1  # covered yet exactly zero
    src_matrix[zero_rows] = 0.0

    tgt_covered = rng.random(n_tgt) < 0.8
    tgt_matrix = rng.standard_normal((n_tgt, d_w))
    tgt_matrix[rng.random(n_tgt) < 0.1] = 0.0

    u_src = subword_vectors(src_vocab, src_matrix, src_covered)
    u_tgt = subword_vectors(tgt_vocab, tgt_matrix, tgt_covered)

    config = TransplantConfig(
        k=int(rng.integers(1, 13)),
        tau=float(rng.choice([0.05, 0.1, 1.0])),
        seed=int(rng.integers(0, 2**32)),
    )
    return coords, u_src, u_tgt, src_vocab, tgt_vocab, config
