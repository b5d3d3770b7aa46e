"""Embedding transplantation toolkit.

Moves a pretrained model's subword embedding matrix onto an extended
multilingual vocabulary: factorize the source embeddings, build subword
vectors from external multilingual word vectors, initialize each new
token by copy / similarity / seeded Gaussian fallback, and assemble the
final artifact with a coverage report.
"""

from .assembler import AssembledEmbedding, assemble, write_assembled
from .factorizer import (
    FactorizedEmbedding,
    SpectrumReport,
    count_params,
    explained_variance,
    factorize,
    reconstruct,
)
from .segmenter import Segmenter, load_external_segmentations
from .store import (
    MatrixFormatError,
    Vocabulary,
    WordVectors,
    load_matrix,
    load_vocab,
    load_word_vectors,
    save_matrix,
    save_vocab,
    save_word_vectors,
)
from .subword_space import (
    SubwordOccurrenceIndex,
    SubwordVectors,
    build_occurrence_index,
    build_subword_vectors,
    load_subword_vectors,
    save_subword_vectors,
)
from .transplanter import (
    SourceStats,
    TokenProvenance,
    TransplantConfig,
    TransplantReport,
    compute_source_stats,
    neighbor_weights,
    partition_vocab,
    transplant,
)

__version__ = "0.1.0"

__all__ = [
    "AssembledEmbedding",
    "FactorizedEmbedding",
    "MatrixFormatError",
    "Segmenter",
    "SourceStats",
    "SpectrumReport",
    "SubwordOccurrenceIndex",
    "SubwordVectors",
    "TokenProvenance",
    "TransplantConfig",
    "TransplantReport",
    "Vocabulary",
    "WordVectors",
    "assemble",
    "build_occurrence_index",
    "build_subword_vectors",
    "compute_source_stats",
    "count_params",
    "explained_variance",
    "factorize",
    "load_external_segmentations",
    "load_matrix",
    "load_subword_vectors",
    "load_vocab",
    "load_word_vectors",
    "neighbor_weights",
    "partition_vocab",
    "reconstruct",
    "save_matrix",
    "save_subword_vectors",
    "save_vocab",
    "save_word_vectors",
    "transplant",
    "write_assembled",
]
