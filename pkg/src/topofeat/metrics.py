"""Bottleneck distance between persistence diagrams, and a stability probe."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .complex import build_cech
from .persistence import PersistenceDiagram, diagram
from .pointcloud import PointCloud

DIAGONAL = -1
ORACLE_MAX_POINTS = 6


def _split(D, dim: int | None) -> tuple[np.ndarray, np.ndarray]:
    """(finite (k, 2) array, sorted births of essential classes)."""
    if isinstance(D, PersistenceDiagram):
        if dim is None:
            raise ValueError("dim is required when passing a PersistenceDiagram")
        arr = D.intervals(dim)
    else:
        arr = np.asarray(D, dtype=float).reshape(-1, 2)
    inf = np.isinf(arr[:, 1])
    return arr[~inf], np.sort(arr[inf, 0])


def _essential_cost(a: np.ndarray, b: np.ndarray) -> float:
    if len(a) != len(b):
        return math.inf
    # in one dimension the order-preserving matching minimises the largest shift
    return float(np.max(np.abs(a - b))) if len(a) else 0.0


def _costs(A: np.ndarray, B: np.ndarray):
    pair = np.maximum(np.abs(A[:, None, 0] - B[None, :, 0]), np.abs(A[:, None, 1] - B[None, :, 1]))
    return pair, (A[:, 1] - A[:, 0]) / 2.0, (B[:, 1] - B[:, 0]) / 2.0


def _match(pair, diag_a, diag_b, r: float) -> np.ndarray:
    """Maximum matching using only edges of cost <= r; ``-1`` marks an unmatched row.

    Rows are A's points then one diagonal slot per B point; columns are B's
    points then one diagonal slot per A point.  Diagonal-to-diagonal is free.
    """
    n, m = pair.shape
    rows, cols = [], []
    ai, bj = np.nonzero(pair <= r)
    rows.append(ai)
    cols.append(bj)
    ok_a = np.flatnonzero(diag_a <= r)
    rows.append(ok_a)
    cols.append(m + ok_a)
    ok_b = np.flatnonzero(diag_b <= r)
    rows.append(n + ok_b)
    cols.append(ok_b)
    dj, di = np.meshgrid(np.arange(m), np.arange(n), indexing="ij")
    rows.append(n + dj.ravel())
    cols.append(m + di.ravel())
    rows, cols = np.concatenate(rows), np.concatenate(cols)
    size = n + m
    graph = csr_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(size, size))
    return maximum_bipartite_matching(graph, perm_type="column")


def _feasible(pair, diag_a, diag_b, r: float) -> bool:
    return bool(np.all(_match(pair, diag_a, diag_b, r) >= 0))


def bottleneck(D, E, dim: int | None = None) -> float:
    """Bottleneck distance with the L-infinity ground metric.

    Points may be matched to the diagonal at half their persistence.  The
    answer is one of the finitely many candidate costs, found by binary
    search with a bipartite-matching feasibility test, so no tolerance is
    involved.  Essential classes must pair off one-to-one per dimension or
    the distance is infinite.
    """
    return _solve(D, E, dim)[0]


def _solve(D, E, dim):
    A, a_inf = _split(D, dim)
    B, b_inf = _split(E, dim)
    ess = _essential_cost(a_inf, b_inf)
    if math.isinf(ess) or (len(A) == 0 and len(B) == 0):
        return ess, A, B, None
    pair, diag_a, diag_b = _costs(A, B)
    cand = np.unique(np.concatenate([[0.0], pair.ravel(), diag_a, diag_b]))
    lo, hi = 0, len(cand) - 1  # the largest candidate is always feasible
    while lo < hi:
        mid = (lo + hi) // 2
        if _feasible(pair, diag_a, diag_b, cand[mid]):
            hi = mid
        else:
            lo = mid + 1
    return max(float(cand[lo]), ess), A, B, _match(pair, diag_a, diag_b, cand[lo])


def optimal_matching(D, E, dim: int | None = None) -> list[tuple[int, int]]:
    """A bottleneck-optimal matching of the finite points.

    Returns ``(i, j)`` pairs indexing the finite points of ``D`` and ``E`` in
    the order :meth:`PersistenceDiagram.intervals` lists them (essential
    classes excluded); ``j`` or ``i`` is :data:`DIAGONAL` for a point sent to
    the diagonal.  Empty when the distance is infinite.
    """
    cost, A, B, match = _solve(D, E, dim)
    if match is None:
        return []
    n, m = len(A), len(B)
    out = []
    # match[row] is the column assigned to that row
    for row, col in enumerate(match.tolist()):
        if row < n:
            out.append((row, col) if col < m else (row, DIAGONAL))
        elif col < m:
            out.append((DIAGONAL, col))
    return sorted(out)


def bottleneck_oracle(D, E, dim: int | None = None) -> float:
    """Exact bottleneck distance by enumerating every partial matching.

    Only for tiny diagrams (at most six finite points in total).
    """
    A, a_inf = _split(D, dim)
    B, b_inf = _split(E, dim)
    if len(A) + len(B) > ORACLE_MAX_POINTS:
        raise ValueError(f"oracle limited to {ORACLE_MAX_POINTS} finite points")
    ess = _essential_cost(a_inf, b_inf)
    if math.isinf(ess):
        return ess
    pair, diag_a, diag_b = _costs(A, B)
    best = math.inf

    def walk(i: int, used: frozenset, worst: float):
        nonlocal best
        if worst >= best:
            return
        if i == len(A):
            rest = [diag_b[j] for j in range(len(B)) if j not in used]
            best = min(best, max([worst, *rest]))
            return
        walk(i + 1, used, max(worst, diag_a[i]))
        for j in range(len(B)):
            if j not in used:
                walk(i + 1, used | {j}, max(worst, pair[i, j]))

    walk(0, frozenset(), 0.0)
    return max(float(best), ess)


@dataclass(frozen=True)
class StabilityResult:
    distances: dict
    bound: float

    @property
    def violated(self) -> bool:
        return any(d > self.bound for d in self.distances.values())


def stability_probe(pc: PointCloud, noise: float, seed: int) -> StabilityResult:
    """Jitter every point by at most ``noise`` per coordinate and compare Čech diagrams.

    The jitter moves each point by at most ``sqrt(2) * noise``, which bounds
    the change of every Čech radius value and therefore the bottleneck
    distance in every dimension.
    """
    if noise < 0:
        raise ValueError("noise must be non-negative")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    moved = PointCloud(pc.points + rng.uniform(-noise, noise, size=pc.points.shape), pc.source)
    d0 = diagram(build_cech(pc, max_dim=2))
    d1 = diagram(build_cech(moved, max_dim=2))
    dists = {k: bottleneck(d0, d1, k) for k in (0, 1)}
    return StabilityResult(dists, math.sqrt(2.0) * noise)
