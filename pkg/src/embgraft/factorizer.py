"""Low-rank factorization of embedding matrices and spectrum analysis.

``factorize`` splits an embedding matrix E into per-token coordinates and
an orthonormal-row basis with ``coords @ basis ~= E`` (thin SVD, singular
values absorbed into the coordinates so the basis stays orthonormal).
``explained_variance`` is the PCA view of the same spectrum: it mean-
centers columns first, which factorize deliberately does not do because
the pipeline must reconstruct E itself, not E minus its mean.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import store, util

SIGN_CONVENTION = "max-abs-positive"
FACTORIZATION_MANIFEST = "factorization.json"
BASIS_FILE = "p.ofat"
COORDS_FILE = "f.ofat"


@dataclass(frozen=True)
class FactorizedEmbedding:
    """Orthonormal-row basis plus per-token coordinates.

    In identity mode (no factorization) `basis` is the identity matrix
    and `coords` is the original embedding matrix unchanged.
    """

    basis: np.ndarray    # latent_dim x model_dim, rows orthonormal
    coords: np.ndarray   # vocab_size x latent_dim
    latent_dim: int
    model_dim: int
    identity: bool = False

    def __post_init__(self):
        if self.basis.shape != (self.latent_dim, self.model_dim):
            raise ValueError(f"basis shape {self.basis.shape} does not match dims")
        if self.coords.shape[1] != self.latent_dim:
            raise ValueError(
                f"coords have {self.coords.shape[1]} columns for latent_dim "
                f"{self.latent_dim}"
            )

    @property
    def vocab_size(self) -> int:
        return self.coords.shape[0]


@dataclass(frozen=True)
class SpectrumReport:
    """Singular spectrum of a column-centered matrix (PCA convention)."""

    singular_values: np.ndarray    # descending
    explained_variance: np.ndarray  # cumulative fraction for 1..max_components
    frobenius_norm: float          # of the centered matrix


def factorize(embeddings, latent_dim: int | None = None) -> FactorizedEmbedding:
    """Thin SVD truncated to `latent_dim`; None requests identity mode.

    Returns coords = U_k * S_k and basis = Vt_k, computed in float64 and
    stored as float32. Each right singular vector is flipped so its
    largest-magnitude entry is positive (earliest entry on ties), which
    pins the otherwise arbitrary SVD signs and makes the factorization
    reproducible bit for bit.
    """
    m = store.as_matrix(embeddings)
    rows, cols = m.shape
    if latent_dim is None:
        basis = np.eye(cols, dtype=np.float32)
        basis.flags.writeable = False
        return FactorizedEmbedding(
            basis=basis, coords=m, latent_dim=cols, model_dim=cols, identity=True
        )
    bound = min(rows, cols)
    if not 1 <= latent_dim <= bound:
        raise ValueError(f"latent_dim must be in [1, {bound}], got {latent_dim}")
    try:
        u, s, vt = np.linalg.svd(m.astype(np.float64), full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(
            f"SVD failed on {rows}x{cols} matrix "
            f"(fro={float(np.linalg.norm(m)):.6g}, "
            f"min={float(m.min()):.6g}, max={float(m.max()):.6g}): {exc}"
        ) from exc
    anchor = np.abs(vt).argmax(axis=1)  # argmax takes the earliest on ties
    signs = np.sign(vt[np.arange(vt.shape[0]), anchor])
    signs[signs == 0] = 1.0
    vt *= signs[:, None]
    u *= signs[None, :]
    coords = np.ascontiguousarray((u[:, :latent_dim] * s[:latent_dim]), dtype=np.float32)
    basis = np.ascontiguousarray(vt[:latent_dim], dtype=np.float32)
    coords.flags.writeable = False
    basis.flags.writeable = False
    return FactorizedEmbedding(
        basis=basis, coords=coords, latent_dim=latent_dim, model_dim=cols,
        identity=False,
    )


def reconstruct(fe: FactorizedEmbedding, rows=None) -> np.ndarray:
    """``coords[rows] @ basis`` with float64 accumulation, float32 result."""
    coords = fe.coords
    if rows is not None:
        idx = np.atleast_1d(np.asarray(rows, dtype=np.int64))
        if idx.size and (idx.min() < 0 or idx.max() >= coords.shape[0]):
            raise IndexError(
                f"row subset out of range for {coords.shape[0]} rows"
            )
        coords = coords[idx]
    out = coords.astype(np.float64) @ fe.basis.astype(np.float64)
    return out.astype(np.float32)


def explained_variance(embeddings, max_components: int) -> SpectrumReport:
    """Cumulative variance fractions of the column-centered matrix."""
    m = store.as_matrix(embeddings)
    rows, cols = m.shape
    if rows < 2:
        raise ValueError(f"need at least 2 rows, got {rows}")
    bound = min(rows - 1, cols)
    if not 1 <= max_components <= bound:
        raise ValueError(f"max_components must be in [1, {bound}], got {max_components}")
    centered = m.astype(np.float64)
    centered -= centered.mean(axis=0, keepdims=True)
    s = np.linalg.svd(centered, compute_uv=False)
    total = float(np.sum(s**2))
    if total == 0.0:
        raise ValueError("matrix has zero variance (all rows identical)")
    fractions = np.cumsum(s**2) / total
    s.flags.writeable = False
    fractions.flags.writeable = False
    return SpectrumReport(
        singular_values=s,
        explained_variance=fractions[:max_components],
        frobenius_norm=math.sqrt(total),
    )


def count_params(vocab_size: int, model_dim: int,
                 latent_dim: int | None = None) -> dict:
    """Embedding parameter budget: |V|*D full, |V|*D' + D'*D factorized."""
    if vocab_size <= 0 or model_dim <= 0:
        raise ValueError("vocab_size and model_dim must be positive")
    if latent_dim is None:
        return {
            "embedding_params": vocab_size * model_dim,
            "note": f"full matrix {vocab_size}x{model_dim}, no factorization",
        }
    if latent_dim <= 0:
        raise ValueError("latent_dim must be positive")
    return {
        "embedding_params": vocab_size * latent_dim + latent_dim * model_dim,
        "note": (
            f"coordinates {vocab_size}x{latent_dim} "
            f"+ basis {latent_dim}x{model_dim}"
        ),
    }


def save_factorization(fe: FactorizedEmbedding, out_dir) -> None:
    """Two matrix files plus a small JSON manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    store.save_matrix(fe.basis, out / BASIS_FILE)
    store.save_matrix(fe.coords, out / COORDS_FILE)
    util.write_json(
        {
            "latent_dim": fe.latent_dim,
            "model_dim": fe.model_dim,
            "vocab_size": fe.vocab_size,
            "identity": fe.identity,
            "sign_convention": SIGN_CONVENTION,
        },
        out / FACTORIZATION_MANIFEST,
    )


def load_factorization(in_dir) -> FactorizedEmbedding:
    path = Path(in_dir)
    meta = json.loads((path / FACTORIZATION_MANIFEST).read_text(encoding="utf-8"))
    basis = store.load_matrix(path / BASIS_FILE)
    coords = store.load_matrix(path / COORDS_FILE)
    fe = FactorizedEmbedding(
        basis=basis, coords=coords,
        latent_dim=int(meta["latent_dim"]), model_dim=int(meta["model_dim"]),
        identity=bool(meta.get("identity", False)),
    )
    if fe.vocab_size != int(meta["vocab_size"]):
        raise ValueError(
            f"{path}: manifest vocab_size {meta['vocab_size']} does not match "
            f"coords rows {fe.vocab_size}"
        )
    return fe
