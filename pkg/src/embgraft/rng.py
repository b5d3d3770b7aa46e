"""Counter-based Gaussian draws keyed by (seed, row).

Fallback rows must come out identical no matter how the work is sharded,
so each row gets its own Philox stream keyed by (seed, row index), and
dimension j consumes exactly the j-th 64-bit word of that stream. A
drawn value therefore depends only on (seed, row, j).

The draw is pinned, and tests re-derive it independently from this
definition::

    words = Philox(key=[seed, row]).random_raw(dim)       # uint64 per dim
    u     = ((words >> 12) + 0.5) * 2**-52                # uniform in (0, 1)
    value = mean + sqrt(var) * ndtri(u)                   # inverse normal CDF
"""

from __future__ import annotations

import numpy as np
from numpy.random import Philox
from scipy.special import ndtri

_SHIFT = np.uint64(12)
_SCALE = 2.0 ** -52


def keyed_uniforms(seed: int, row: int, n: int) -> np.ndarray:
    """n uniforms in the open interval (0, 1), pure function of (seed, row, j)."""
    words = Philox(key=[np.uint64(seed), np.uint64(row)]).random_raw(n)
    return ((words >> _SHIFT).astype(np.float64) + 0.5) * _SCALE


def gaussian_row(seed: int, row: int, mean: np.ndarray, std: np.ndarray) -> np.ndarray:
    """One fallback row: elementwise Normal(mean, std**2), float64."""
    return mean + std * ndtri(keyed_uniforms(seed, row, len(mean)))
