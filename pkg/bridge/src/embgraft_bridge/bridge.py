"""Move embedding matrices between checkpoints and portable files.

A checkpoint is a directory holding ``model.safetensors`` plus
``config.json`` (hidden_size, vocab_size, tie_word_embeddings). Export
pulls the embedding tensor out into the portable matrix container with
a vocabulary file and a small manifest; import grafts an assembled
full-mode embedding matrix back into a checkpoint skeleton, touching
nothing else. The bridge does no numerics, only copies and format
translation.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
from safetensors.numpy import load_file, save_file

from . import ofat

WEIGHTS_FILE = "model.safetensors"
CONFIG_FILE = "config.json"
BRIDGE_MANIFEST_FILE = "bridge_manifest.json"

# embedding tensor names used by the common encoder checkpoint layouts
KNOWN_EMBEDDING_KEYS = (
    "roberta.embeddings.word_embeddings.weight",
    "bert.embeddings.word_embeddings.weight",
    "embeddings.word_embeddings.weight",
    "model.embed_tokens.weight",
    "embed_tokens.weight",
    "transformer.wte.weight",
    "wte.weight",
    "word_embeddings.weight",
)

# head tensors that share weights with the embedding when tying is on
KNOWN_TIED_HEAD_KEYS = (
    "lm_head.decoder.weight",
    "lm_head.weight",
    "cls.predictions.decoder.weight",
)


class BridgeError(ValueError):
    pass


@dataclass(frozen=True)
class BridgeManifest:
    model_id: str
    embedding_key: str
    vocab_size: int
    hidden_size: int
    tie_embeddings: bool


def _load_checkpoint(checkpoint_dir):
    path = Path(checkpoint_dir)
    weights_path = path / WEIGHTS_FILE
    config_path = path / CONFIG_FILE
    if not weights_path.is_file():
        raise BridgeError(f"{path}: no {WEIGHTS_FILE}")
    if not config_path.is_file():
        raise BridgeError(f"{path}: no {CONFIG_FILE}")
    tensors = load_file(weights_path)
    config = json.loads(config_path.read_text(encoding="utf-8"))
    return tensors, config


def find_embedding_key(tensors: dict, config: dict,
                       embedding_key: str | None = None) -> str:
    """The explicit key, a known name, or the unique tensor shaped
    (config vocab_size, hidden_size)."""
    if embedding_key is not None:
        if embedding_key not in tensors:
            raise BridgeError(f"embedding tensor {embedding_key!r} not found")
        return embedding_key
    for key in KNOWN_EMBEDDING_KEYS:
        if key in tensors:
            return key
    vocab_size = config.get("vocab_size")
    hidden = config.get("hidden_size")
    matches = [
        key for key, tensor in tensors.items()
        if tensor.ndim == 2 and tensor.shape[0] == vocab_size
        and tensor.shape[1] == hidden
        and not any(key == h for h in KNOWN_TIED_HEAD_KEYS)
    ]
    if len(matches) == 1:
        return matches[0]
    raise BridgeError(
        "embedding tensor not found: pass --embedding-key "
        f"(candidates by shape: {matches})"
    )


def export_embeddings(checkpoint_dir, vocab_file, out_dir,
                      embedding_key: str | None = None,
                      model_id: str | None = None) -> BridgeManifest:
    """Checkpoint -> (matrix container, vocab file, manifest) in out_dir.

    Fails before writing anything if the vocabulary length does not match
    the embedding row count, or if the tensor is not float32 (conversion
    would break the bitwise round-trip contract).
    """
    tensors, config = _load_checkpoint(checkpoint_dir)
    key = find_embedding_key(tensors, config, embedding_key)
    embedding = tensors[key]
    if embedding.dtype != np.float32:
        raise BridgeError(
            f"{key} has dtype {embedding.dtype}; only float32 checkpoints "
            "round-trip exactly"
        )
    vocab_lines = Path(vocab_file).read_text(encoding="utf-8")
    if vocab_lines.endswith("\n"):
        vocab_lines = vocab_lines[:-1]
    tokens = vocab_lines.split("\n") if vocab_lines else []
    if len(tokens) != embedding.shape[0]:
        raise BridgeError(
            f"vocab file has {len(tokens)} tokens but {key} has "
            f"{embedding.shape[0]} rows"
        )
    manifest = BridgeManifest(
        model_id=model_id or str(config.get("model_type", "unknown")),
        embedding_key=key,
        vocab_size=embedding.shape[0],
        hidden_size=embedding.shape[1],
        tie_embeddings=bool(config.get("tie_word_embeddings", True)),
    )
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ofat.write_matrix(embedding, out / "embeddings.ofat")
    (out / "vocab.txt").write_text(
        "".join(t + "\n" for t in tokens), encoding="utf-8"
    )
    (out / BRIDGE_MANIFEST_FILE).write_text(
        json.dumps(asdict(manifest), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    return manifest


def _tensor_digest(tensor: np.ndarray) -> str:
    h = hashlib.sha256()
    h.update(str(tensor.dtype).encode())
    h.update(str(tensor.shape).encode())
    h.update(np.ascontiguousarray(tensor).tobytes())
    return h.hexdigest()


def import_embeddings(assembled_dir, skeleton_dir, out_dir,
                      embedding_key: str | None = None) -> dict:
    """Graft an assembled full-mode matrix into a checkpoint skeleton.

    Replaces the embedding tensor (and the tied LM head if the skeleton
    config ties weights and such a tensor exists), updates the config's
    vocab_size, and writes the new checkpoint. Every other tensor is
    verified bitwise-unchanged after the write; returns a report of what
    was replaced and verified.
    """
    assembled = Path(assembled_dir)
    manifest_path = assembled / "manifest.json"
    if not manifest_path.is_file():
        raise BridgeError(f"{assembled}: missing manifest.json")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    if manifest.get("mode") != "full":
        raise BridgeError(
            f"assembled mode is {manifest.get('mode')!r}; import needs 'full' "
            "(up-project first)"
        )
    matrix = ofat.read_matrix(assembled / "e_t.ofat")
    if matrix.shape != (manifest["vocab_size"], manifest["model_dim"]):
        raise BridgeError(
            f"e_t.ofat shape {matrix.shape} disagrees with manifest "
            f"({manifest['vocab_size']}, {manifest['model_dim']})"
        )

    tensors, config = _load_checkpoint(skeleton_dir)
    key = find_embedding_key(tensors, config, embedding_key)
    hidden = int(config.get("hidden_size", tensors[key].shape[1]))
    if matrix.shape[1] != hidden:
        raise BridgeError(
            f"assembled model_dim {matrix.shape[1]} does not match skeleton "
            f"hidden size {hidden}"
        )

    before = {name: _tensor_digest(t) for name, t in tensors.items()}
    replaced = [key]
    new_tensors = dict(tensors)
    new_tensors[key] = matrix
    if bool(config.get("tie_word_embeddings", True)):
        for head in KNOWN_TIED_HEAD_KEYS:
            if head in new_tensors:
                new_tensors[head] = matrix
                replaced.append(head)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_file(new_tensors, out / WEIGHTS_FILE)
    new_config = dict(config)
    new_config["vocab_size"] = int(matrix.shape[0])
    (out / CONFIG_FILE).write_text(
        json.dumps(new_config, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )

    # verify from the written file: untouched tensors keep their digests
    written = load_file(out / WEIGHTS_FILE)
    mismatched = [
        name for name, t in written.items()
        if name not in replaced and _tensor_digest(t) != before[name]
    ]
    if mismatched:
        raise BridgeError(f"import corrupted untouched tensors: {mismatched}")
    return {
        "embedding_key": key,
        "replaced": replaced,
        "verified_unchanged": len(written) - len(replaced),
        "vocab_size": int(matrix.shape[0]),
        "hidden_size": hidden,
    }
