"""Filtered simplicial complexes on planar point clouds.

Three constructions are provided, each tagged with the scale convention of
its filtration values:

``rips_diameter``
    a simplex enters when its longest edge does (edge value = length).
``cech_radius``
    a simplex enters at the radius of the smallest ball enclosing it.
``alpha_squared_radius``
    the alpha complex of the Delaunay triangulation, valued in squared radii.

Čech and Rips values are on the same footing (radius vs. diameter) so that
``cech <= rips <= 2 * cech`` holds simplexwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial import Delaunay, QhullError, cKDTree

from .pointcloud import PointCloud, pairwise_distances

CONVENTIONS = ("rips_diameter", "cech_radius", "alpha_squared_radius")
CECH_SIZE_CAP = 64
DEDUP_TOL = 1e-9


class DegenerateInputError(ValueError):
    """Raised when a point cloud cannot support the requested construction."""


Simplex = tuple  # strictly increasing vertex indices


class FilteredComplex:
    """Simplices with filtration values, sorted by (value, dimension, vertices).

    Immutable once built.  ``points`` holds the vertex coordinates after
    de-duplication; ``vertex_origin[i]`` is the index in the source cloud
    that vertex ``i`` came from.
    """

    def __init__(self, simplices: Sequence[Simplex], values: Sequence[float], convention: str,
                 points: np.ndarray | None = None, vertex_origin: np.ndarray | None = None,
                 presorted: bool = False, validate: bool = True):
        if convention not in CONVENTIONS:
            raise ValueError(f"unknown convention {convention!r}")
        simplices = [tuple(int(v) for v in s) for s in simplices]
        values = np.asarray(values, dtype=float)
        if len(simplices) != len(values):
            raise ValueError("simplices and values differ in length")
        if not presorted:
            order = sorted(range(len(simplices)),
                           key=lambda i: (values[i], len(simplices[i]), simplices[i]))
            simplices = [simplices[i] for i in order]
            values = values[order]
        self.simplices: tuple[Simplex, ...] = tuple(simplices)
        self.values = values
        self.values.setflags(write=False)
        self.convention = convention
        self.points = None if points is None else np.asarray(points, dtype=float)
        self.vertex_origin = vertex_origin
        self.index = {s: i for i, s in enumerate(self.simplices)}
        if len(self.index) != len(self.simplices):
            raise ValueError("duplicate simplex in complex")
        if validate:
            self._validate()

    def _validate(self):
        for i, s in enumerate(self.simplices):
            if not s or any(a >= b for a, b in zip(s, s[1:])):
                raise ValueError(f"simplex {s} is not a strictly increasing vertex list")
            if len(s) == 1:
                continue
            for face in combinations(s, len(s) - 1):
                j = self.index.get(face)
                if j is None:
                    raise ValueError(f"face {face} of {s} missing from complex")
                if j > i:
                    raise ValueError(f"face {face} appears after its coface {s}")

    def __len__(self) -> int:
        return len(self.simplices)

    def __iter__(self):
        return iter(zip(self.simplices, self.values))

    @property
    def dims(self) -> np.ndarray:
        return np.fromiter((len(s) - 1 for s in self.simplices), dtype=int, count=len(self))

    @property
    def max_dim(self) -> int:
        return max((len(s) - 1 for s in self.simplices), default=-1)

    @property
    def n_vertices(self) -> int:
        return sum(1 for s in self.simplices if len(s) == 1)

    def value_of(self, simplex: Iterable[int]) -> float:
        return float(self.values[self.index[tuple(sorted(simplex))]])

    def filtration_max(self) -> float:
        return float(self.values[-1]) if len(self) else 0.0

    def dump(self) -> str:
        """Debug listing: ``dim v0 v1 [v2] : value`` in stored order."""
        return "".join(
            f"{len(s) - 1} {' '.join(map(str, s))} : {float(v)!r}\n" for s, v in self
        )


def dedup_points(pc: PointCloud, tol: float = DEDUP_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Drop points within ``tol`` (per coordinate) of an earlier point.

    Returns the kept coordinates and their indices in ``pc``.
    """
    pts = pc.points
    if len(pts) < 2:
        return pts.copy(), np.arange(len(pts))
    drop = np.zeros(len(pts), dtype=bool)
    for i, j in sorted(cKDTree(pts).query_pairs(tol, p=np.inf)):
        if not drop[i]:
            drop[j] = True
    keep = np.flatnonzero(~drop)
    return pts[keep], keep


# --- Vietoris-Rips -----------------------------------------------------------

def build_rips(pc: PointCloud, max_dim: int = 2, max_value: float = math.inf) -> FilteredComplex:
    """Rips filtration; each simplex is valued by its longest edge."""
    if not 1 <= max_dim <= 3:
        raise ValueError("max_dim must be in 1..3")
    pts, origin = dedup_points(pc)
    if len(pts) == 0:
        raise DegenerateInputError("empty point cloud")
    d = pairwise_distances(PointCloud(pts))
    n = len(pts)
    simplices: list[Simplex] = [(i,) for i in range(n)]
    values: list[float] = [0.0] * n
    iu, ju = np.triu_indices(n, 1)
    ok = d[iu, ju] <= max_value
    nbrs: list[set[int]] = [set() for _ in range(n)]
    for i, j in zip(iu[ok].tolist(), ju[ok].tolist()):
        nbrs[i].add(j)
        simplices.append((i, j))
        values.append(float(d[i, j]))
    frontier = [s for s in simplices if len(s) == 2]
    for _ in range(2, max_dim + 1):
        grown = []
        for s in frontier:
            common = set.intersection(*(nbrs[v] for v in s))
            for w in sorted(c for c in common if c > s[-1]):
                t = s + (w,)
                grown.append(t)
                values.append(max(float(d[a, b]) for a, b in combinations(t, 2)))
        simplices.extend(grown)
        frontier = grown
    return FilteredComplex(simplices, values, "rips_diameter", pts, origin)


# --- Čech ---------------------------------------------------------------------

def min_enclosing_ball_radius(pts) -> float:
    """Radius of the smallest closed disc containing one to three points."""
    p = np.asarray(pts, dtype=float).reshape(-1, 2)
    if not 1 <= len(p) <= 3:
        raise ValueError("expected 1 to 3 points")
    if len(p) == 1:
        return 0.0
    if len(p) == 2:
        return 0.5 * float(math.hypot(*(p[1] - p[0])))
    return float(np.sqrt(_meb_sq_triangles(p[None, 0], p[None, 1], p[None, 2])[0]))


def _meb_sq_triangles(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Squared minimum-enclosing-ball radius for stacked triangles."""
    sides = np.stack([
        np.sum((b - c) ** 2, axis=1),
        np.sum((a - c) ** 2, axis=1),
        np.sum((a - b) ** 2, axis=1),
    ], axis=1)
    longest = sides.max(axis=1)
    obtuse = 2 * longest >= sides.sum(axis=1)  # right or obtuse (incl. collinear)
    out = longest / 4.0
    acute = ~obtuse
    if np.any(acute):
        out[acute] = _circumradius_sq(a[acute], b[acute], c[acute])
    return out


def _circumradius_sq(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    ab2 = np.sum((a - b) ** 2, axis=1)
    bc2 = np.sum((b - c) ** 2, axis=1)
    ca2 = np.sum((c - a) ** 2, axis=1)
    cross = (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0])
    with np.errstate(divide="ignore", invalid="ignore"):
        return ab2 * bc2 * ca2 / (4.0 * cross * cross)


def build_cech(pc: PointCloud, max_dim: int = 2, max_value: float = math.inf) -> FilteredComplex:
    """Čech filtration by minimum-enclosing-ball radius.

    This is the slow reference construction and refuses clouds larger than
    ``CECH_SIZE_CAP`` points.
    """
    if not 1 <= max_dim <= 2:
        raise ValueError("max_dim must be 1 or 2")
    pts, origin = dedup_points(pc)
    if len(pts) == 0:
        raise DegenerateInputError("empty point cloud")
    if len(pts) > CECH_SIZE_CAP:
        raise ValueError(f"Čech complex limited to {CECH_SIZE_CAP} points, got {len(pts)}")
    n = len(pts)
    simplices: list[Simplex] = [(i,) for i in range(n)]
    values: list[float] = [0.0] * n
    d = pairwise_distances(PointCloud(pts))
    for i, j in combinations(range(n), 2):
        r = 0.5 * float(d[i, j])
        if r <= max_value:
            simplices.append((i, j))
            values.append(r)
    if max_dim == 2 and n >= 3:
        tri = np.array(list(combinations(range(n), 3)), dtype=int)
        r = np.sqrt(_meb_sq_triangles(pts[tri[:, 0]], pts[tri[:, 1]], pts[tri[:, 2]]))
        half = 0.5 * d
        # obtuse triangles equal their longest edge; keep that exact despite rounding
        r = np.maximum.reduce([r, half[tri[:, 0], tri[:, 1]], half[tri[:, 0], tri[:, 2]],
                               half[tri[:, 1], tri[:, 2]]])
        for t, v in zip(map(tuple, tri[r <= max_value].tolist()), r[r <= max_value].tolist()):
            simplices.append(t)
            values.append(v)
    return FilteredComplex(simplices, values, "cech_radius", pts, origin)


# --- exact-on-demand predicates ------------------------------------------------

_EPS = np.finfo(float).eps


def _to_ints(*coords: float) -> list[int]:
    """Scale floats by a common power of two so they become exact integers."""
    ratios = [float(c).as_integer_ratio() for c in coords]
    den = max(d for _, d in ratios)
    return [n * (den // d) for n, d in ratios]


def orient2d(a, b, c) -> int:
    """Sign of the signed area of triangle abc (+1 counter-clockwise)."""
    detl = (b[0] - a[0]) * (c[1] - a[1])
    detr = (b[1] - a[1]) * (c[0] - a[0])
    det = detl - detr
    if abs(det) > 4 * _EPS * (abs(detl) + abs(detr)):
        return 1 if det > 0 else -1
    ax, ay, bx, by, cx, cy = _to_ints(a[0], a[1], b[0], b[1], c[0], c[1])
    e = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    return (e > 0) - (e < 0)


def incircle(a, b, c, d) -> int:
    """+1 if d lies strictly inside the circle through counter-clockwise abc,
    -1 if strictly outside, 0 if cocircular."""
    adx, ady = a[0] - d[0], a[1] - d[1]
    bdx, bdy = b[0] - d[0], b[1] - d[1]
    cdx, cdy = c[0] - d[0], c[1] - d[1]
    alift = adx * adx + ady * ady
    blift = bdx * bdx + bdy * bdy
    clift = cdx * cdx + cdy * cdy
    t1 = alift * (bdx * cdy - bdy * cdx)
    t2 = blift * (cdx * ady - cdy * adx)
    t3 = clift * (adx * bdy - ady * bdx)
    det = t1 + t2 + t3
    perm = (alift * (abs(bdx * cdy) + abs(bdy * cdx)) + blift * (abs(cdx * ady) + abs(cdy * adx))
            + clift * (abs(adx * bdy) + abs(ady * bdx)))
    if abs(det) > 16 * _EPS * perm:
        return 1 if det > 0 else -1
    ax, ay, bx, by, cx, cy, dx, dy = _to_ints(a[0], a[1], b[0], b[1], c[0], c[1], d[0], d[1])
    adx, ady, bdx, bdy, cdx, cdy = ax - dx, ay - dy, bx - dx, by - dy, cx - dx, cy - dy
    e = ((adx * adx + ady * ady) * (bdx * cdy - bdy * cdx)
         + (bdx * bdx + bdy * bdy) * (cdx * ady - cdy * adx)
         + (cdx * cdx + cdy * cdy) * (adx * bdy - ady * bdx))
    return (e > 0) - (e < 0)


# --- Delaunay -----------------------------------------------------------------

@dataclass(frozen=True)
class DelaunayTriangulation:
    """Triangles (sorted index triples) and edges over de-duplicated points."""

    points: np.ndarray
    triangles: np.ndarray
    edges: np.ndarray
    vertex_origin: np.ndarray


def _all_collinear(pts: np.ndarray) -> bool:
    if len(pts) < 3:
        return True
    a = pts[0]
    far = int(np.argmax(np.sum((pts - a) ** 2, axis=1)))
    b = pts[far]
    return all(orient2d(a, b, c) == 0 for c in pts)


def _flip_candidates(pts, tris, edge_map) -> list[tuple[int, int]]:
    """Interior edges that a float incircle test cannot certify as legal."""
    interior = [(e, ts) for e, ts in edge_map.items() if len(ts) == 2]
    if not interior:
        return []
    t = np.asarray(tris)
    e = np.array([e for e, _ in interior])
    t0 = t[[ts[0] for _, ts in interior]]
    t1 = t[[ts[1] for _, ts in interior]]
    # vertex of the second triangle opposite the shared edge
    d = t1[(t1 != e[:, :1]) & (t1 != e[:, 1:])]
    a, b, cc, dd = pts[t0[:, 0]], pts[t0[:, 1]], pts[t0[:, 2]], pts[d]
    ad, bd, cd = a - dd, b - dd, cc - dd
    al, bl, cl = (ad ** 2).sum(1), (bd ** 2).sum(1), (cd ** 2).sum(1)
    m1 = bd[:, 0] * cd[:, 1] - bd[:, 1] * cd[:, 0]
    m2 = cd[:, 0] * ad[:, 1] - cd[:, 1] * ad[:, 0]
    m3 = ad[:, 0] * bd[:, 1] - ad[:, 1] * bd[:, 0]
    det = al * m1 + bl * m2 + cl * m3
    perm = (al * (np.abs(bd[:, 0] * cd[:, 1]) + np.abs(bd[:, 1] * cd[:, 0]))
            + bl * (np.abs(cd[:, 0] * ad[:, 1]) + np.abs(cd[:, 1] * ad[:, 0]))
            + cl * (np.abs(ad[:, 0] * bd[:, 1]) + np.abs(ad[:, 1] * bd[:, 0])))
    legal = det < -32 * _EPS * perm
    return [interior[k][0] for k in np.flatnonzero(~legal)]


def _legalize(pts: np.ndarray, tris: list[list[int]]) -> list[list[int]]:
    """Lawson flips until every interior edge is locally Delaunay.

    Cocircular quadrilaterals keep the diagonal whose sorted vertex pair is
    lexicographically smaller.  ``tris`` must be counter-clockwise.
    """
    edge_map: dict[tuple[int, int], list[int]] = {}

    def key(u, v):
        return (u, v) if u < v else (v, u)

    def register(t_id):
        t = tris[t_id]
        for k in range(3):
            edge_map.setdefault(key(t[k], t[(k + 1) % 3]), []).append(t_id)

    def unregister(t_id):
        t = tris[t_id]
        for k in range(3):
            edge_map[key(t[k], t[(k + 1) % 3])].remove(t_id)

    for t_id in range(len(tris)):
        register(t_id)

    stack = _flip_candidates(pts, tris, edge_map)
    while stack:
        e = stack.pop()
        ts = edge_map.get(e)
        if not ts or len(ts) != 2:
            continue
        t0, t1 = ts
        u, v = e
        c = next(x for x in tris[t0] if x != u and x != v)
        d = next(x for x in tris[t1] if x != u and x != v)
        # orient so that (p, q, c) is counter-clockwise with p, q = the shared edge
        tri0 = tris[t0]
        k = tri0.index(c)
        p, q = tri0[(k + 1) % 3], tri0[(k + 2) % 3]
        s = incircle(pts[p], pts[q], pts[c], pts[d])
        if s < 0 or (s == 0 and key(c, d) > e):
            continue
        unregister(t0)
        unregister(t1)
        # quad p, d, q, c is counter-clockwise; new diagonal c-d
        tris[t0] = [c, p, d]
        tris[t1] = [d, q, c]
        register(t0)
        register(t1)
        stack.extend([key(p, d), key(d, q), key(q, c), key(c, p)])
    return tris


def delaunay_2d(pc: PointCloud) -> DelaunayTriangulation:
    """Delaunay triangulation with a deterministic rule for cocircular ties.

    Qhull supplies an initial triangulation; a flip pass with exact
    predicates then certifies the empty-circumcircle property and applies
    the tie rule, so the result does not depend on Qhull's joggling.
    """
    pts, origin = dedup_points(pc)
    if len(pts) < 3 or _all_collinear(pts):
        raise DegenerateInputError("Delaunay triangulation needs 3 non-collinear points")
    try:
        qh = Delaunay(pts)
    except QhullError as exc:  # pragma: no cover - guarded by the collinearity test
        raise DegenerateInputError(str(exc)) from exc
    if len(qh.coplanar):
        raise DegenerateInputError("Qhull dropped near-coincident points")
    tris = []
    for t in qh.simplices.tolist():
        o = orient2d(pts[t[0]], pts[t[1]], pts[t[2]])
        if o == 0:
            continue
        tris.append(t if o > 0 else [t[0], t[2], t[1]])
    tris = _legalize(pts, tris)
    tri = np.sort(np.array(tris, dtype=int), axis=1)
    tri = tri[np.lexsort(tri.T[::-1])]
    edges = np.unique(np.concatenate([tri[:, [0, 1]], tri[:, [0, 2]], tri[:, [1, 2]]]), axis=0)
    return DelaunayTriangulation(pts, tri, edges, origin)


# --- alpha --------------------------------------------------------------------

def build_alpha(pc: PointCloud) -> FilteredComplex:
    """Alpha filtration of the Delaunay triangulation in squared radii."""
    dt = delaunay_2d(pc)
    pts, tri = dt.points, dt.triangles
    tri_val = _circumradius_sq(pts[tri[:, 0]], pts[tri[:, 1]], pts[tri[:, 2]])

    # each triangle contributes its three edges together with the opposite vertex
    local = np.array([[0, 1, 2], [0, 2, 1], [1, 2, 0]])
    e_all = np.concatenate([tri[:, l[:2]] for l in local])
    opp = np.concatenate([tri[:, l[2]] for l in local])
    owner = np.tile(np.arange(len(tri)), 3)
    edges, inv = np.unique(e_all, axis=0, return_inverse=True)
    inv = inv.ravel()

    a, b, o = pts[e_all[:, 0]], pts[e_all[:, 1]], pts[opp]
    encroached = np.sum((o - a) * (o - b), axis=1) < 0
    attached = np.zeros(len(edges), dtype=bool)
    np.logical_or.at(attached, inv, encroached)
    min_coface = np.full(len(edges), np.inf)
    np.minimum.at(min_coface, inv, tri_val[owner])
    half_sq = np.sum((pts[edges[:, 0]] - pts[edges[:, 1]]) ** 2, axis=1) / 4.0
    edge_val = np.where(attached, min_coface, half_sq)

    # faces never exceed cofaces; enforce against rounding
    tri_val = np.maximum(tri_val, np.max(edge_val[inv.reshape(3, -1)], axis=0))

    n = len(pts)
    simplices = [(i,) for i in range(n)]
    simplices += list(map(tuple, edges.tolist()))
    simplices += list(map(tuple, tri.tolist()))
    values = np.concatenate([np.zeros(n), edge_val, tri_val])
    return FilteredComplex(simplices, values, "alpha_squared_radius", pts, dt.vertex_origin,
                           validate=False)
