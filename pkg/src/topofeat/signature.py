"""Truncated signatures of piecewise-linear paths.

Level ``m`` of a signature over ``n`` channels is stored as an array of shape
``(n,) * m``; flattening it in C order lists the coefficients in
lexicographic multi-index order.  Multi-indices in the public helpers are
1-based, channel ``1`` being the first column of the path.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .persistence import PersistenceDiagram
from .vectorize import LANDSCAPE_RESOLUTION, landscapes

MAX_LEVEL = 4


@dataclass(frozen=True)
class SignatureTensor:
    levels: tuple[np.ndarray, ...]  # levels[0] is the scalar 1

    @property
    def max_level(self) -> int:
        return len(self.levels) - 1

    @property
    def channels(self) -> int:
        return self.levels[1].shape[0] if self.max_level else 0

    def __getitem__(self, index) -> float:
        """Coefficient S^{i_1,...,i_k} for a 1-based multi-index."""
        index = (index,) if isinstance(index, (int, np.integer)) else tuple(index)
        if not index:
            return float(self.levels[0])
        return float(self.levels[len(index)][tuple(i - 1 for i in index)])

    def flatten(self, start_level: int = 1) -> np.ndarray:
        return np.concatenate([lvl.ravel() for lvl in self.levels[start_level:]])

    def __matmul__(self, other: "SignatureTensor") -> "SignatureTensor":
        return tensor_product(self, other)


def tensor_product(a: SignatureTensor, b: SignatureTensor) -> SignatureTensor:
    """Truncated product in the tensor algebra (Chen's identity when a, b
    are signatures of consecutive path pieces)."""
    depth = min(a.max_level, b.max_level)
    out = []
    for m in range(depth + 1):
        acc = np.zeros(a.levels[m].shape if m else ())
        for i in range(m + 1):
            acc = acc + np.multiply.outer(a.levels[i], b.levels[m - i])
        out.append(acc)
    return SignatureTensor(tuple(out))


def segment_signature(increment: np.ndarray, max_level: int) -> SignatureTensor:
    """Signature of one straight segment: the tensor exponential of its increment."""
    increment = np.asarray(increment, dtype=float)
    levels = [np.array(1.0)]
    for m in range(1, max_level + 1):
        levels.append(np.multiply.outer(levels[-1], increment) / m)
    return SignatureTensor(tuple(levels))


def _check_level(max_level: int):
    if not 1 <= max_level <= MAX_LEVEL:
        raise ValueError(f"max_level must be in 1..{MAX_LEVEL}")


def signature(path, max_level: int = 3) -> SignatureTensor:
    """Signature of the piecewise-linear interpolation of ``path`` (T x n)."""
    _check_level(max_level)
    path = np.asarray(path, dtype=float)
    if path.ndim != 2 or path.shape[0] < 2:
        raise ValueError("path must be a (T, n) array with T >= 2")
    if not np.all(np.isfinite(path)):
        raise ValueError("path has non-finite entries")
    n = path.shape[1]
    sig = SignatureTensor(tuple([np.array(1.0)] + [np.zeros((n,) * m) for m in range(1, max_level + 1)]))
    for inc in np.diff(path, axis=0):
        if not inc.any():
            continue
        sig = _extend(sig, inc)
    return sig


def _extend(sig: SignatureTensor, inc: np.ndarray) -> SignatureTensor:
    # S ⊗ exp(inc), level by level: new_m = sum_i S_i ⊗ inc^{⊗(m-i)} / (m-i)!
    depth = sig.max_level
    powers = [np.array(1.0)]
    for k in range(1, depth + 1):
        powers.append(np.multiply.outer(powers[-1], inc) / k)
    out = [sig.levels[0]]
    for m in range(1, depth + 1):
        acc = sig.levels[m].copy()
        for i in range(m):
            acc += np.multiply.outer(sig.levels[i], powers[m - i])
        out.append(acc)
    return SignatureTensor(tuple(out))


def shuffle_product(I: Sequence[int], J: Sequence[int]) -> list[tuple[int, ...]]:
    """All interleavings of I and J that keep each one's internal order.

    Returned as a list, so repeated multi-indices carry their multiplicity;
    there are C(|I| + |J|, |I|) entries.
    """
    I, J = tuple(I), tuple(J)
    if not I:
        return [J]
    if not J:
        return [I]
    return ([(I[0],) + w for w in shuffle_product(I[1:], J)]
            + [(J[0],) + w for w in shuffle_product(I, J[1:])])


SIGNATURE_K = 5
SIGNATURE_LEVEL = 3
SIGNATURE_DIMS = (0, 1)


def signature_length(channels: int = SIGNATURE_K, max_level: int = SIGNATURE_LEVEL) -> int:
    return sum(channels ** m for m in range(1, max_level + 1))


def landscape_path(D: PersistenceDiagram, dim: int, k_max: int = SIGNATURE_K,
                   resolution: int = LANDSCAPE_RESOLUTION) -> np.ndarray:
    """(resolution, k_max) path whose channels are λ_1..λ_k sampled along the grid."""
    return landscapes(D, dim, k_max, resolution).values.T


def signature_feature(D: PersistenceDiagram, k_max: int = SIGNATURE_K, max_level: int = SIGNATURE_LEVEL,
                      resolution: int = LANDSCAPE_RESOLUTION) -> np.ndarray:
    """Stacked signatures of the landscape paths of H0 and H1.

    The constant level-0 term is left out, giving ``2 x 155`` values for the
    default five landscapes and three levels.
    """
    rows = [signature(landscape_path(D, dim, k_max, resolution), max_level).flatten(1)
            for dim in SIGNATURE_DIMS]
    return np.vstack(rows)
