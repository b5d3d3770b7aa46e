"""Checkpoint boundary adapter for the embedding transplant pipeline."""

from .bridge import (
    BridgeError,
    BridgeManifest,
    export_embeddings,
    find_embedding_key,
    import_embeddings,
)
from .ofat import read_matrix, write_matrix

__version__ = "0.1.0"

__all__ = [
    "BridgeError",
    "BridgeManifest",
    "export_embeddings",
    "find_embedding_key",
    "import_embeddings",
    "read_matrix",
    "write_matrix",
]
