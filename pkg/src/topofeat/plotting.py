"""Matplotlib figures for point clouds, diagrams and their vectorizations.

Every function draws on a fresh figure via the object-oriented API and
writes it to ``path``; nothing touches global pyplot state, so the module
is safe to use from worker processes.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from matplotlib.figure import Figure

from .persistence import PersistenceDiagram
from .pointcloud import PointCloud
from .vectorize import LandscapeSet, SilhouettePath

DIM_COLORS = ("tab:blue", "tab:orange", "tab:green")
TICK_SIZE = 8


def _figure(width: float = 4.0, height: float = 4.0) -> Figure:
    return Figure(figsize=(width, height), dpi=120, layout="constrained")


def _save(fig: Figure, path) -> Path:
    path = Path(path)
    fig.savefig(path)
    return path


def _tidy(ax):
    for side in ("top", "right"):
        ax.spines[side].set_visible(False)
    ax.tick_params(labelsize=TICK_SIZE)


def plot_cloud(pc: PointCloud, path, title: str | None = None) -> Path:
    fig = _figure()
    ax = fig.add_subplot()
    pts = pc.points
    ax.scatter(pts[:, 0], pts[:, 1], s=6, color="k", linewidths=0)
    # image coordinates: rows grow downward
    if pc.source in ("resize", "contour"):
        ax.invert_yaxis()
    ax.set_aspect("equal")
    ax.set_title(title or f"{len(pts)} points ({pc.source})")
    _tidy(ax)
    return _save(fig, path)


def plot_diagram(dgm: PersistenceDiagram, path, title: str | None = None) -> Path:
    """Birth/death scatter with the diagonal; essential classes drawn on a dashed top line."""
    fig = _figure()
    ax = fig.add_subplot()
    finite = [p for p in dgm.pairs if not p.is_infinite]
    values = [p.death for p in finite] + [p.birth for p in dgm.pairs]
    hi = max(values) if values and max(values) > 0 else max(float(dgm.max_value), 1.0)
    top = hi * 1.1
    for d in dgm.dims:
        iv = dgm.intervals(d)
        fin = iv[np.isfinite(iv[:, 1])]
        ess = iv[~np.isfinite(iv[:, 1])]
        color = DIM_COLORS[d % len(DIM_COLORS)]
        ax.scatter(fin[:, 0], fin[:, 1], s=12, color=color, label=f"H{d}")
        ax.scatter(ess[:, 0], np.full(len(ess), top), s=20, marker="^", color=color)
    ax.plot([0, top], [0, top], color="0.5", lw=0.8)
    ax.axhline(top, color="0.5", lw=0.6, ls="--")
    ax.set_xlim(-0.02 * top, top * 1.02)
    ax.set_ylim(-0.02 * top, top * 1.05)
    ax.set_xlabel("birth")
    ax.set_ylabel("death")
    ax.set_title(title or f"{dgm.convention} diagram")
    if dgm.pairs:
        ax.legend(frameon=False, loc="lower right")
    _tidy(ax)
    return _save(fig, path)


def plot_landscapes(L: LandscapeSet, path, title: str | None = None) -> Path:
    fig = _figure(5.0, 3.0)
    ax = fig.add_subplot()
    for k, row in enumerate(L.values, start=1):
        ax.plot(L.t_grid, row, lw=1.0, label=f"λ{k}")
    ax.set_xlabel("t")
    ax.set_title(title or "landscapes")
    ax.legend(frameon=False, fontsize=7)
    _tidy(ax)
    return _save(fig, path)


def plot_silhouettes(paths: dict[int, SilhouettePath], path, title: str | None = None) -> Path:
    """One curve per homology dimension, each on its own t-range."""
    fig = _figure(5.0, 3.0)
    ax = fig.add_subplot()
    for d, s in sorted(paths.items()):
        ax.plot(s.t_grid, s.values, lw=1.2, color=DIM_COLORS[d % len(DIM_COLORS)], label=f"H{d}")
    ax.set_xlabel("t")
    ax.set_title(title or "silhouettes")
    ax.legend(frameon=False)
    _tidy(ax)
    return _save(fig, path)
