"""Persistence landscapes and silhouettes sampled on a uniform grid."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .persistence import PersistenceDiagram

LANDSCAPE_RESOLUTION = 100
SILHOUETTE_RESOLUTION = 200


@dataclass(frozen=True)
class Tent:
    birth: float
    death: float

    def __post_init__(self):
        if self.birth > self.death:
            raise ValueError("tent needs birth <= death")

    def __call__(self, t):
        return tent_eval(self, t)


def tent_eval(p: Tent, t):
    """max(0, min(t - b, d - t)); accepts scalars or arrays."""
    t = np.asarray(t, dtype=float)
    return np.maximum(0.0, np.minimum(t - p.birth, p.death - t))


def truncation_value(D: PersistenceDiagram) -> float:
    """Stand-in death for essential classes: the largest finite death of the
    whole diagram, else the largest filtration value."""
    finite = [p.death for p in D.pairs if not p.is_infinite]
    return max(finite) if finite else float(D.max_value)


def finite_intervals(D: PersistenceDiagram, dim: int) -> np.ndarray:
    iv = D.intervals(dim).copy()
    if len(iv):
        cap = truncation_value(D)
        inf = np.isinf(iv[:, 1])
        iv[inf, 1] = np.maximum(cap, iv[inf, 0])
    return iv


def _grid(iv: np.ndarray, resolution: int, t_range=None) -> tuple[float, float, np.ndarray]:
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    if t_range is not None:
        lo, hi = map(float, t_range)
        if not hi > lo:
            raise ValueError("t_range must be increasing")
        return lo, hi, np.linspace(lo, hi, resolution)
    if len(iv) == 0 or iv[:, 1].max() <= iv[:, 0].min():
        return 0.0, 1.0, np.linspace(0.0, 1.0, resolution)
    lo, hi = float(iv[:, 0].min()), float(iv[:, 1].max())
    return lo, hi, np.linspace(lo, hi, resolution)


def _tents(iv: np.ndarray, t: np.ndarray) -> np.ndarray:
    """(bars, samples) matrix of tent values."""
    return np.maximum(0.0, np.minimum(t[None, :] - iv[:, :1], iv[:, 1:] - t[None, :]))


@dataclass(frozen=True)
class LandscapeSet:
    """``values[k - 1]`` samples landscape λ_k on a uniform grid over
    ``[t_min, t_max]``.  The grid is reported on [0, 1] when
    ``domain_normalized``; the raw range stays available via ``t_grid``."""

    values: np.ndarray
    t_min: float
    t_max: float
    domain_normalized: bool = True

    @property
    def k_max(self) -> int:
        return self.values.shape[0]

    @property
    def resolution(self) -> int:
        return self.values.shape[1]

    @property
    def t_grid(self) -> np.ndarray:
        return np.linspace(self.t_min, self.t_max, self.resolution)

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.resolution) if self.domain_normalized else self.t_grid


def landscapes_from_intervals(iv, k_max: int, resolution: int = LANDSCAPE_RESOLUTION,
                              t_range=None) -> LandscapeSet:
    iv = np.asarray(iv, dtype=float).reshape(-1, 2)
    if k_max < 1:
        raise ValueError("k_max must be positive")
    lo, hi, t = _grid(iv, resolution, t_range)
    out = np.zeros((k_max, resolution))
    if len(iv) and hi > lo:
        tents = -np.sort(-_tents(iv, t), axis=0)
        k = min(k_max, len(iv))
        out[:k] = tents[:k]
    return LandscapeSet(out, lo, hi)


def landscapes(D: PersistenceDiagram, dim: int, k_max: int = 5,
               resolution: int = LANDSCAPE_RESOLUTION, t_range=None) -> LandscapeSet:
    """The first ``k_max`` landscapes: λ_k(t) is the k-th largest tent value at t.

    The grid spans the bars of ``dim`` unless ``t_range`` fixes it, which is
    what averaging several diagrams needs.
    """
    return landscapes_from_intervals(finite_intervals(D, dim), k_max, resolution, t_range)


@dataclass(frozen=True)
class SilhouettePath:
    values: np.ndarray
    t_min: float
    t_max: float
    weight_kind: str = "constant"

    @property
    def resolution(self) -> int:
        return len(self.values)

    @property
    def t_grid(self) -> np.ndarray:
        return np.linspace(self.t_min, self.t_max, self.resolution)


def _weight_kind(weight) -> tuple[str, float]:
    if weight in (None, "constant"):
        return "constant", 0.0
    if isinstance(weight, (int, float)):
        return f"power({weight:g})", float(weight)
    if isinstance(weight, str) and weight.startswith("power(") and weight.endswith(")"):
        return weight, float(weight[6:-1])
    raise ValueError(f"unknown weight {weight!r}; use 'constant' or a power p")


def silhouette_from_intervals(iv, weight="constant", resolution: int = SILHOUETTE_RESOLUTION,
                              normalize: bool = False) -> SilhouettePath:
    iv = np.asarray(iv, dtype=float).reshape(-1, 2)
    kind, power = _weight_kind(weight)
    lo, hi, t = _grid(iv, resolution)
    vals = np.zeros(resolution)
    if len(iv) and hi > lo:
        w = np.ones(len(iv)) if kind == "constant" else (iv[:, 1] - iv[:, 0]) ** power
        if w.sum() > 0:
            vals = (w[:, None] * _tents(iv, t)).sum(axis=0) / w.sum()
    if normalize and vals.max() > 0:
        vals = vals / vals.max()
    return SilhouettePath(vals, lo, hi, kind)


def silhouette(D: PersistenceDiagram, dim: int, weight="constant",
               resolution: int = SILHOUETTE_RESOLUTION, normalize: bool = False) -> SilhouettePath:
    """Weighted mean of the tents of one dimension.

    ``weight`` is ``"constant"`` or a power ``p`` giving each bar the weight
    ``(death - birth) ** p``.  With ``normalize`` the path is scaled to peak 1.
    """
    return silhouette_from_intervals(finite_intervals(D, dim), weight, resolution, normalize)


def landscape_norm(L: LandscapeSet, p: float = 2.0) -> float:
    """(Σ_k ||λ_k||_p^p)^(1/p), integrating over the raw grid with the trapezoid rule."""
    if p < 1:
        raise ValueError("p must be at least 1")
    if math.isinf(p):
        return float(np.max(L.values, initial=0.0))
    integrals = np.trapezoid(np.abs(L.values) ** p, L.t_grid, axis=1)
    return float(np.sum(integrals) ** (1.0 / p))


def landscape_distance(L: LandscapeSet, M: LandscapeSet, p: float = 2.0) -> float:
    _check_compatible([L, M])
    return landscape_norm(LandscapeSet(L.values - M.values, L.t_min, L.t_max), p)


def _check_compatible(Ls: Sequence[LandscapeSet]):
    first = Ls[0]
    for L in Ls[1:]:
        if L.values.shape != first.values.shape or (L.t_min, L.t_max) != (first.t_min, first.t_max):
            raise ValueError("landscapes are sampled on different grids")


def mean_landscape(Ls: Sequence[LandscapeSet]) -> LandscapeSet:
    """Pointwise mean of landscapes sampled on one common grid."""
    if not Ls:
        raise ValueError("need at least one landscape")
    _check_compatible(Ls)
    first = Ls[0]
    return LandscapeSet(np.mean([L.values for L in Ls], axis=0), first.t_min, first.t_max,
                        first.domain_normalized)
