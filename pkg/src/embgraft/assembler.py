"""Produce the final target embedding artifact.

Factorized mode passes the coordinate/basis pair through byte-identical;
full mode up-projects coordinates through the basis. The manifest embeds
content digests of every input, so its own digest changes exactly when
any input byte changes, and it records a weight-tying hint for consumers
that materialize a language-modeling head.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import store, util
from .factorizer import FactorizedEmbedding

FACTORIZED = "factorized"
FULL = "full"

MANIFEST_FILE = "manifest.json"
TARGET_COORDS_FILE = "f_t.ofat"
BASIS_FILE = "p.ofat"
FULL_EMBEDDINGS_FILE = "e_t.ofat"


@dataclass(frozen=True)
class AssembledEmbedding:
    mode: str
    manifest: dict
    coords: np.ndarray | None = None       # factorized mode
    basis: np.ndarray | None = None        # factorized mode
    embeddings: np.ndarray | None = None   # full mode


def assemble(target_coords, fe: FactorizedEmbedding, mode: str,
             config_echo: dict | None = None,
             report_digest: str | None = None) -> AssembledEmbedding:
    """Assemble output matrices plus a manifest describing the run."""
    if mode not in (FACTORIZED, FULL):
        raise ValueError(f"mode must be {FACTORIZED!r} or {FULL!r}, got {mode!r}")
    coords = store.as_matrix(target_coords)
    if coords.shape[1] != fe.latent_dim:
        raise ValueError(
            f"coords have {coords.shape[1]} columns, factorization expects "
            f"{fe.latent_dim}"
        )
    manifest = {
        "format": "embgraft-assembled",
        "version": 1,
        "mode": mode,
        "vocab_size": coords.shape[0],
        "model_dim": fe.model_dim,
        "latent_dim": fe.latent_dim,
        "identity_factorization": fe.identity,
        # consumers that build an LM head should tie it to these weights
        "tie_embeddings_hint": True,
        "config": config_echo,
        "report_digest": report_digest,
        "inputs": {
            "target_coords_sha256": util.sha256_hex(store.matrix_to_bytes(coords)),
            "basis_sha256": util.sha256_hex(store.matrix_to_bytes(fe.basis)),
        },
    }
    if mode == FACTORIZED:
        return AssembledEmbedding(
            mode=mode, manifest=manifest, coords=coords, basis=fe.basis
        )
    emb = (coords.astype(np.float64) @ fe.basis.astype(np.float64)).astype(np.float32)
    emb.flags.writeable = False
    return AssembledEmbedding(mode=mode, manifest=manifest, embeddings=emb)


def write_assembled(ae: AssembledEmbedding, out_dir,
                    report_json: bytes | None = None) -> list[Path]:
    """Write the output directory layout; returns the files written."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if ae.mode == FACTORIZED:
        store.save_matrix(ae.coords, out / TARGET_COORDS_FILE)
        store.save_matrix(ae.basis, out / BASIS_FILE)
        written += [out / TARGET_COORDS_FILE, out / BASIS_FILE]
    else:
        store.save_matrix(ae.embeddings, out / FULL_EMBEDDINGS_FILE)
        written.append(out / FULL_EMBEDDINGS_FILE)
    if report_json is not None:
        (out / "report.json").write_bytes(report_json)
        written.append(out / "report.json")
    util.write_json(ae.manifest, out / MANIFEST_FILE)
    written.append(out / MANIFEST_FILE)
    return written
