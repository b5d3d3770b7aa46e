import json

import numpy as np
import pytest
from safetensors.numpy import save_file

EMBED_KEY = "roberta.embeddings.word_embeddings.weight"
HEAD_KEY = "lm_head.decoder.weight"


@pytest.fixture
def checkpoint(tmp_path):
    """Synthetic checkpoint: embedding + tied head + assorted other tensors."""
    rng = np.random.default_rng(42)
    embedding = rng.standard_normal((7, 4)).astype(np.float32)
    tensors = {
        EMBED_KEY: embedding,
        HEAD_KEY: embedding.copy(),
        "encoder.layer.0.attention.weight": rng.standard_normal((4, 4)).astype(np.float32),
        "encoder.layer.0.ln.bias": rng.standard_normal(4).astype(np.float32),
        "embeddings.position_ids": np.arange(16, dtype=np.int64).reshape(1, 16),
    }
    config = {
        "model_type": "test-roberta",
        "vocab_size": 7,
        "hidden_size": 4,
        "tie_word_embeddings": True,
    }
    ckpt = tmp_path / "ckpt"
    ckpt.mkdir()
    save_file(tensors, ckpt / "model.safetensors")
    (ckpt / "config.json").write_text(json.dumps(config))
    vocab = tmp_path / "vocab.txt"
    vocab.write_text("".join(f"tok{i}\n" for i in range(7)), encoding="utf-8")
    return ckpt, vocab, tensors, config
