"""Planar point clouds, seeded samplers and the plain-text cloud format."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

SOURCES = ("resize", "contour", "synthetic", "file")


@dataclass(frozen=True)
class PointCloud:
    """An ordered set of 2-D points.

    Point order is significant: it fixes vertex indices for every complex
    built from the cloud.
    """

    points: np.ndarray = field(default_factory=lambda: np.empty((0, 2)))
    source: str = "synthetic"

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).reshape(-1, 2)
        if not np.all(np.isfinite(pts)):
            raise ValueError("point cloud contains non-finite coordinates")
        if self.source not in SOURCES:
            raise ValueError(f"unknown point cloud source {self.source!r}")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return len(self.points)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PointCloud):
            return NotImplemented
        return self.source == other.source and np.array_equal(self.points, other.points)

    @classmethod
    def from_xy(cls, xy: Iterable[Iterable[float]], source: str = "synthetic") -> "PointCloud":
        return cls(np.array([tuple(p) for p in xy], dtype=float).reshape(-1, 2), source)


def _rng(seed: int) -> np.random.Generator:
    # PCG64 via SeedSequence: stable across platforms and numpy releases.
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def _rejection_sample(n: int, radius: float, accept, rng: np.random.Generator) -> np.ndarray:
    out = np.empty((0, 2))
    while len(out) < n:
        batch = rng.uniform(-radius, radius, size=(max(2 * (n - len(out)), 16), 2))
        out = np.vstack([out, batch[accept(np.hypot(batch[:, 0], batch[:, 1]))]])
    return out[:n]


def sample_disc(n: int, seed: int) -> PointCloud:
    """Uniform sample of ``n`` points from the closed unit disc."""
    if n < 0:
        raise ValueError("n must be non-negative")
    pts = _rejection_sample(n, 1.0, lambda r: r <= 1.0, _rng(seed))
    return PointCloud(pts, "synthetic")


def sample_annulus(n: int, r_in: float, r_out: float, seed: int) -> PointCloud:
    """Uniform-in-area sample from the annulus ``r_in <= |p| <= r_out``."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if not (0 < r_in < r_out):
        raise ValueError(f"need 0 < r_in < r_out, got r_in={r_in}, r_out={r_out}")
    pts = _rejection_sample(n, r_out, lambda r: (r >= r_in) & (r <= r_out), _rng(seed))
    return PointCloud(pts, "synthetic")


def pairwise_distances(pc: PointCloud) -> np.ndarray:
    """Euclidean distance matrix with an exact zero diagonal."""
    p = pc.points
    diff = p[:, None, :] - p[None, :, :]
    d = np.hypot(diff[..., 0], diff[..., 1])
    np.fill_diagonal(d, 0.0)
    return d


def read_points(path: str | Path) -> PointCloud:
    """Read ``x y`` pairs, one per line; ``#`` starts a comment."""
    rows = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"{path}:{lineno}: expected 'x y', got {line!r}")
        rows.append((float(parts[0]), float(parts[1])))
    return PointCloud(np.array(rows, dtype=float).reshape(-1, 2), "file")


def format_points(pc: PointCloud) -> str:
    # repr() of a Python float is the shortest string that round-trips.
    return "".join(f"{float(x)!r} {float(y)!r}\n" for x, y in pc.points)


def write_points(pc: PointCloud, path: str | Path, comment: str | None = None) -> None:
    header = f"# {comment}\n" if comment else ""
    Path(path).write_text(header + format_points(pc))
