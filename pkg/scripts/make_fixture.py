#!/usr/bin/env python3
"""Regenerate the small committed pipeline fixture.

Writes tests/fixtures/pipeline_small/: a 20-subword source vocabulary,
a target vocabulary that exercises all three initialization routes, a
word-vector file, seeded source embeddings, a pipeline config, and
expected_report.json holding the brute-force provenance classification
(computed here with the test oracle, never with the pipeline itself).
"""

from __future__ import annotations

import json
import math
import sys
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "tests"))

import oracle  # noqa: E402
from embgraft import store  # noqa: E402

M = "▁"

SOURCE_VOCAB = [
    f"{M}un", "believ", "able", f"{M}re", "run",
    f"{M}walk", "ing", "ed", f"{M}talk", "s",
    f"{M}big", "ger", "est", f"{M}sun", "ny",
    f"{M}moon", "light", f"{M}sea", "food", f"{M}star",
]

TARGET_VOCAB = [
    # shared with the source vocabulary (copied)
    f"{M}un", "believ", "able", f"{M}walk", "ing", "ed",
    f"{M}talk", "s", f"{M}sun", "ny", f"{M}moon", "light",
    # reachable from the word list (similarity)
    f"{M}chat", "eau", f"{M}gat", "o", f"{M}perr",
    f"{M}luna", f"{M}sol", f"{M}mar", "isco",
    # never produced by any segmentation (random)
    f"{M}qx", "zzz", f"{M}blorp", "qq",
]

WORDS = [
    "unbelievable", "rerun", "walking", "walked", "talks", "talking",
    "bigger", "biggest", "sunny", "moonlight", "seafood", "starlight",
    "chateau", "chateaus", "gato", "gats", "perro", "luna", "lunas",
    "sol", "mar", "marisco",
    "дом", "猫",  # unsegmentable in either vocabulary
]

CONFIG = {
    "source_embeddings": "source_embeddings.ofat",
    "source_vocab": "source_vocab.txt",
    "target_vocab": "target_vocab.txt",
    "word_vectors": "words.vec",
    "output_dir": "out",
    "latent_dim": 4,
    "k": 3,
    "tau": 0.1,
    "seed": 11,
    "mode": "full",
    "emit_provenance": False,
}


def word_matrix(rng):
    matrix = np.round(rng.uniform(-2, 2, (len(WORDS), 6)), 3).astype(np.float32)
    # gato/gats cancel exactly so the target piece "gat" ends up covered
    # with an exactly-zero vector (forcing its random fallback)
    gato = WORDS.index("gato")
    gats = WORDS.index("gats")
    matrix[gato] = np.array([1.0, -2.0, 0.5, 0.0, 0.25, 1.0], np.float32)
    matrix[gats] = -matrix[gato]
    return matrix


def classify(words, matrix):
    """Brute-force provenance classification, oracle-side only."""
    seg_source = {w: oracle.greedy_segment(SOURCE_VOCAB, M, w) for w in words}
    seg_target = {w: oracle.greedy_segment(TARGET_VOCAB, M, w) for w in words}

    source_sets = oracle.occurrence_sets(words, seg_source.get, SOURCE_VOCAB)
    target_sets = oracle.occurrence_sets(words, seg_target.get, TARGET_VOCAB)

    def vector(sets, token):
        positions = sets[token]
        if not positions:
            return None
        return oracle.mean_rows(matrix, positions)

    candidates = [
        tok for tok in SOURCE_VOCAB
        if (vec := vector(source_sets, tok)) is not None
        and math.sqrt(sum(v * v for v in vec)) > 0.0
    ]
    modes = []
    for token in TARGET_VOCAB:
        if token in set(SOURCE_VOCAB):
            modes.append("copied")
            continue
        vec = vector(target_sets, token)
        usable = vec is not None and math.sqrt(sum(v * v for v in vec)) > 0.0
        modes.append("similarity" if usable and candidates else "random")
    return modes


def main():
    out = ROOT / "tests" / "fixtures" / "pipeline_small"
    out.mkdir(parents=True, exist_ok=True)

    (out / "source_vocab.txt").write_text("\n".join(SOURCE_VOCAB) + "\n", "utf-8")
    (out / "target_vocab.txt").write_text("\n".join(TARGET_VOCAB) + "\n", "utf-8")

    rng = np.random.default_rng(202)
    matrix = word_matrix(rng)
    store.save_word_vectors(
        store.WordVectors(store.Vocabulary(WORDS), matrix), out / "words.vec"
    )

    emb = np.round(
        np.random.default_rng(303).standard_normal((len(SOURCE_VOCAB), 8)), 4
    ).astype(np.float32)
    store.save_matrix(emb, out / "source_embeddings.ofat")

    (out / "config.json").write_text(
        json.dumps(CONFIG, indent=2, sort_keys=True) + "\n", "utf-8"
    )

    modes = classify(WORDS, matrix)
    counts = {
        "copied": modes.count("copied"),
        "similarity": modes.count("similarity"),
        "random": modes.count("random"),
        "total": len(modes),
    }
    expected = {
        "counts": counts,
        "coverage": (counts["copied"] + counts["similarity"]) / counts["total"],
        "modes": modes,
    }
    (out / "expected_report.json").write_text(
        json.dumps(expected, indent=2, sort_keys=True) + "\n", "utf-8"
    )
    print("counts:", counts)
    print("modes:", modes)


if __name__ == "__main__":
    main()
