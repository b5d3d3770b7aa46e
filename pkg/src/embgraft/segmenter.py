"""Deterministic word -> subword segmentation over a fixed vocabulary."""

from __future__ import annotations

from .store import Vocabulary

GREEDY = "greedy"
EXTERNAL = "external"

DEFAULT_MARKER = "▁"  # the word-initial marker most subword vocabularies use


class Segmenter:
    """Splits single words into vocabulary subwords.

    Greedy mode prepends ``boundary_marker`` to the word and repeatedly
    takes the longest vocabulary token that prefixes the remainder; a
    position with no match makes the whole word unsegmentable and the
    result is the empty list. External mode replays a precomputed
    word -> pieces table, so the exact output of any real tokenizer can
    be injected; words absent from the table are unsegmentable.

    Instances are immutable and safe to share across threads.
    """

    def __init__(self, vocab: Vocabulary, boundary_marker: str = DEFAULT_MARKER,
                 mode: str = GREEDY, external_map: dict[str, list[str]] | None = None):
        if mode not in (GREEDY, EXTERNAL):
            raise ValueError(f"mode must be {GREEDY!r} or {EXTERNAL!r}, got {mode!r}")
        if mode == EXTERNAL and external_map is None:
            raise ValueError("external mode requires an external_map")
        self.vocab = vocab
        self.boundary_marker = boundary_marker
        self.mode = mode
        self.external_map = external_map
        self._max_piece = max((len(t) for t in vocab.tokens), default=0)

    def segment(self, word: str) -> list[str]:
        """Subword pieces of `word`, or [] if it cannot be segmented."""
        if not word or any(c.isspace() for c in word):
            raise ValueError(f"word must be non-empty and whitespace-free: {word!r}")
        if self.mode == EXTERNAL:
            return list(self.external_map.get(word, ()))
        index = self.vocab.index
        marked = self.boundary_marker + word
        pieces: list[str] = []
        pos, end = 0, len(marked)
        while pos < end:
            for length in range(min(self._max_piece, end - pos), 0, -1):
                piece = marked[pos:pos + length]
                if piece in index:
                    pieces.append(piece)
                    pos += length
                    break
            else:
                return []
        return pieces


def load_external_segmentations(path) -> dict[str, list[str]]:
    """Parse "word<TAB>sub1 sub2 ..." lines; later duplicates override earlier."""
    table: dict[str, list[str]] = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f):
            line = line.rstrip("\n")
            word, sep, rest = line.partition("\t")
            if not sep:
                raise ValueError(
                    f"{path} line {lineno}: expected 'word<TAB>pieces', got {line!r}"
                )
            table[word] = rest.split()
    return table


def save_external_segmentations(table: dict[str, list[str]], path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for word, pieces in table.items():
            f.write(f"{word}\t{' '.join(pieces)}\n")
