"""Persistent homology over GF(2).

Columns of the boundary matrix are Python integers used as bit sets: bit
``r`` of column ``j`` is set when simplex ``r`` is a facet of simplex ``j``.
Column addition is then a single XOR and the pivot ("low") of a column is
``bit_length() - 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Iterable

import numpy as np

from .complex import FilteredComplex


@dataclass(frozen=True)
class BoundaryMatrix:
    columns: tuple[int, ...]
    dims: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.columns)

    def column(self, j: int) -> list[int]:
        """Row indices set in column ``j``, ascending."""
        c, rows = self.columns[j], []
        while c:
            low = c & -c
            rows.append(low.bit_length() - 1)
            c ^= low
        return rows


def boundary_matrix(fc: FilteredComplex) -> BoundaryMatrix:
    cols = []
    for s in fc.simplices:
        c = 0
        if len(s) > 1:
            for face in combinations(s, len(s) - 1):
                r = fc.index.get(face)
                if r is None:
                    raise ValueError(f"face {face} of {s} missing from complex")
                c |= 1 << r
        cols.append(c)
    return BoundaryMatrix(tuple(cols), tuple(len(s) - 1 for s in fc.simplices))


@dataclass(frozen=True)
class Reduction:
    """Outcome of column reduction.

    ``pivot_col[r] = j`` records that column ``j`` reduced to lowest row ``r``,
    i.e. simplex ``j`` kills the class born at simplex ``r``.
    """

    reduced: dict
    pivot_col: dict
    cleared: frozenset


def reduce(bm: BoundaryMatrix) -> Reduction:
    """Standard column reduction with the twist (clearing) optimisation.

    Dimensions are processed from the top down; once column ``j`` has pivot
    ``r``, column ``r`` is known to reduce to zero and is skipped.
    """
    reduced: dict[int, int] = {}
    pivot_col: dict[int, int] = {}
    cleared: set[int] = set()
    by_dim: dict[int, list[int]] = {}
    for j, d in enumerate(bm.dims):
        by_dim.setdefault(d, []).append(j)
    for d in sorted(by_dim, reverse=True):
        if d == 0:
            continue
        for j in by_dim[d]:
            if j in cleared:
                continue
            c = bm.columns[j]
            while c:
                low = c.bit_length() - 1
                k = pivot_col.get(low)
                if k is None:
                    pivot_col[low] = j
                    reduced[j] = c
                    cleared.add(low)
                    break
                c ^= reduced[k]
    return Reduction(reduced, pivot_col, frozenset(cleared))


@dataclass(frozen=True)
class PersistencePair:
    dim: int
    birth: float
    death: float
    birth_simplex: int
    death_simplex: int | None = None

    @property
    def persistence(self) -> float:
        return self.death - self.birth

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.death)


@dataclass(frozen=True)
class PersistenceDiagram:
    """Finite and essential pairs of a filtration.

    ``zero_pairs`` keeps the birth == death pairs that are dropped from
    ``pairs``; ``max_value`` is the largest filtration value of the source
    complex (used to truncate essential classes when nothing else is finite).
    """

    pairs: tuple[PersistencePair, ...]
    convention: str = "alpha_squared_radius"
    zero_pairs: tuple[PersistencePair, ...] = field(default=(), repr=False)
    max_value: float = 0.0

    def __len__(self) -> int:
        return len(self.pairs)

    @property
    def dims(self) -> list[int]:
        return sorted({p.dim for p in self.pairs})

    def in_dim(self, dim: int) -> list[PersistencePair]:
        return [p for p in self.pairs if p.dim == dim]

    def intervals(self, dim: int) -> np.ndarray:
        """``(k, 2)`` array of (birth, death) for one dimension."""
        return np.array([(p.birth, p.death) for p in self.in_dim(dim)], dtype=float).reshape(-1, 2)

    def sorted_triples(self) -> list[tuple[int, float, float]]:
        return sorted((p.dim, p.birth, p.death) for p in self.pairs)

    def _map(self, f, convention: str) -> "PersistenceDiagram":
        def conv(p):
            return PersistencePair(p.dim, f(p.birth), f(p.death), p.birth_simplex, p.death_simplex)
        return PersistenceDiagram(tuple(map(conv, self.pairs)), convention,
                                  tuple(map(conv, self.zero_pairs)), f(self.max_value))

    def squared(self) -> "PersistenceDiagram":
        """Values squared (radius -> squared radius)."""
        if self.convention == "alpha_squared_radius":
            return self
        return self._map(lambda v: v * v, "alpha_squared_radius")

    def sqrt(self) -> "PersistenceDiagram":
        """Values square-rooted (alpha squared radius -> radius)."""
        if self.convention != "alpha_squared_radius":
            return self
        return self._map(math.sqrt, "cech_radius")

    def to_text(self) -> str:
        return format_diagram(self.pairs)


def diagram(fc: FilteredComplex, max_hom_dim: int | None = None) -> PersistenceDiagram:
    """Persistence diagram of a filtered complex.

    Homology is reported up to one below the top simplex dimension, since
    classes in the top dimension of a truncated complex are artefacts of the
    truncation.
    """
    if max_hom_dim is None:
        max_hom_dim = max(fc.max_dim - 1, 0)
    red = reduce(boundary_matrix(fc))
    vals = fc.values
    dims = fc.dims
    pairs, zeros = [], []
    deaths = set()
    for r, j in sorted(red.pivot_col.items()):
        deaths.add(j)
        if dims[r] > max_hom_dim:
            continue
        p = PersistencePair(int(dims[r]), float(vals[r]), float(vals[j]), r, j)
        (zeros if p.death == p.birth else pairs).append(p)
    for r in range(len(fc)):
        if r in red.pivot_col or r in deaths or dims[r] > max_hom_dim:
            continue
        # unpaired and not a killer: an essential class
        pairs.append(PersistencePair(int(dims[r]), float(vals[r]), math.inf, r, None))
    pairs.sort(key=lambda p: (p.dim, p.birth, p.death, p.birth_simplex))
    return PersistenceDiagram(tuple(pairs), fc.convention, tuple(zeros), fc.filtration_max())


# --- independent oracle ---------------------------------------------------------

def _insert(basis: dict[int, int], v: int) -> bool:
    """Add ``v`` to a GF(2) echelon basis keyed by leading bit; False if dependent."""
    while v:
        top = v.bit_length() - 1
        b = basis.get(top)
        if b is None:
            basis[top] = v
            return True
        v ^= b
    return False


def persistent_betti(fc: FilteredComplex, dim: int, i: float, j: float) -> int:
    """Rank of the map H_dim(K_i) -> H_dim(K_j), by direct elimination.

    Computed as ``rank(Z_i + B_j) - rank(B_j)`` where Z_i are the dim-cycles
    of the sublevel complex at ``i`` and B_j the dim-boundaries at ``j``.
    Shares no code with :func:`reduce`.
    """
    if i > j:
        raise ValueError("need i <= j")
    k_simplices = [s for s in fc.simplices if len(s) == dim + 1]
    pos = {s: n for n, s in enumerate(k_simplices)}

    def chain(s):  # boundary of s as a bit set over dim-simplices
        c = 0
        for face in combinations(s, len(s) - 1):
            c |= 1 << pos[face]
        return c

    # cycles of K_i: kernel of the boundary map restricted to dim-simplices with value <= i
    cycles = []
    if dim == 0:
        cycles = [1 << pos[s] for s, v in fc if len(s) == 1 and v <= i]
    else:
        lower = {s: n for n, s in enumerate(t for t in fc.simplices if len(t) == dim)}
        basis: dict[int, tuple[int, int]] = {}
        for s, v in fc:
            if len(s) != dim + 1 or v > i:
                continue
            img = 0
            for face in combinations(s, dim):
                img |= 1 << lower[face]
            combo = 1 << pos[s]
            while img:
                top = img.bit_length() - 1
                hit = basis.get(top)
                if hit is None:
                    basis[top] = (img, combo)
                    break
                img ^= hit[0]
                combo ^= hit[1]
            else:
                cycles.append(combo)
    boundaries: dict[int, int] = {}
    for s, v in fc:
        if len(s) == dim + 2 and v <= j:
            _insert(boundaries, chain(s))
    # each cycle independent of B_j (and of earlier cycles) adds one to the rank
    return sum(_insert(boundaries, z) for z in cycles)


def count_pairs(dgm: PersistenceDiagram, dim: int, i: float, j: float) -> int:
    """Number of classes born by ``i`` and still alive at ``j``."""
    return sum(1 for p in dgm.pairs + dgm.zero_pairs
               if p.dim == dim and p.birth <= i and p.death > j)


# --- text interchange -----------------------------------------------------------

def _fmt(v: float) -> str:
    return "inf" if math.isinf(v) else repr(float(v))


def format_diagram(pairs: Iterable[PersistencePair]) -> str:
    return "".join(f"{p.dim} {_fmt(p.birth)} {_fmt(p.death)}\n" for p in pairs)


def write_diagram(dgm: PersistenceDiagram, path: str | Path) -> None:
    Path(path).write_text(dgm.to_text())


def read_diagram(path: str | Path, convention: str = "alpha_squared_radius") -> PersistenceDiagram:
    pairs = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ValueError(f"{path}:{lineno}: expected 'dim birth death'")
        pairs.append(PersistencePair(int(parts[0]), float(parts[1]), float(parts[2]), -1, None))
    finite = [p.death for p in pairs if not p.is_infinite] + [p.birth for p in pairs]
    return PersistenceDiagram(tuple(pairs), convention, (), max(finite, default=0.0))
