"""Small shared helpers: canonical JSON and content digests."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path


def canonical_json(obj) -> str:
    """Serialize deterministically: sorted keys, fixed separators, one trailing newline."""
    return json.dumps(obj, ensure_ascii=False, sort_keys=True, indent=2) + "\n"


def write_json(obj, path) -> bytes:
    data = canonical_json(obj).encode("utf-8")
    Path(path).write_bytes(data)
    return data


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()
