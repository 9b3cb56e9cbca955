"""Image -> point cloud -> alpha diagram -> feature rows."""

from __future__ import annotations

import csv
import io
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .complex import DegenerateInputError, build_alpha, build_cech, build_rips
from .evaluation import LabeledFeatures
from .imaging import (DEFAULT_FRACTION, DEFAULT_GRID, GrayImage, contour_pointcloud, load_gray,
                      resize_pointcloud)
from .persistence import PersistenceDiagram, diagram
from .pointcloud import PointCloud, read_points
from .signature import signature_feature, signature_length
from .vectorize import LANDSCAPE_RESOLUTION, SILHOUETTE_RESOLUTION, silhouette

log = logging.getLogger(__name__)

IMAGE_SUFFIXES = {".png", ".pgm"}
THREADS_ENV = "TOPOFEAT_THREADS"
FEATURE_DIMS = (0, 1)


@dataclass(frozen=True)
class TransformerConfig:
    cloud_method: str = "resize"
    feature: str = "silhouette"
    grid: int = DEFAULT_GRID
    fraction: float = DEFAULT_FRACTION
    resolution: int | None = None
    k_max: int = 5
    max_level: int = 3
    min_area: int = 1
    normalize: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.cloud_method not in ("resize", "contour"):
            raise ValueError(f"unknown cloud method {self.cloud_method!r}")
        if self.feature not in ("silhouette", "signature"):
            raise ValueError(f"unknown feature {self.feature!r}")
        if self.resolution is None:
            default = SILHOUETTE_RESOLUTION if self.feature == "silhouette" else LANDSCAPE_RESOLUTION
            object.__setattr__(self, "resolution", default)

    @property
    def name(self) -> str:
        return f"{self.cloud_method.capitalize()}_{self.feature}"

    @property
    def shape(self) -> tuple[int, int]:
        if self.feature == "silhouette":
            return (len(FEATURE_DIMS), self.resolution)
        return (len(FEATURE_DIMS), signature_length(self.k_max, self.max_level))


TRANSFORMERS = {
    cfg.name: cfg for cfg in (
        TransformerConfig("resize", "silhouette"),
        TransformerConfig("resize", "signature"),
        TransformerConfig("contour", "silhouette"),
        TransformerConfig("contour", "signature"),
    )
}


@dataclass(frozen=True)
class FeatureRecord:
    id: str
    label: str | None
    values: np.ndarray
    shape: tuple[int, int]
    degenerate: bool = False

    def __post_init__(self):
        if self.values.size != self.shape[0] * self.shape[1]:
            raise ValueError(f"{self.values.size} values do not fit shape {self.shape}")


def image_cloud(img: GrayImage, cfg: TransformerConfig) -> PointCloud:
    if cfg.cloud_method == "resize":
        return resize_pointcloud(img, cfg.grid)
    return contour_pointcloud(img, cfg.fraction, cfg.min_area)


def featurize(dgm: PersistenceDiagram, cfg: TransformerConfig) -> np.ndarray:
    if cfg.feature == "silhouette":
        rows = [silhouette(dgm, d, "constant", cfg.resolution, cfg.normalize).values for d in FEATURE_DIMS]
        return np.vstack(rows)
    return signature_feature(dgm, cfg.k_max, cfg.max_level, cfg.resolution)


def extract(source, cfg: TransformerConfig, id: str | None = None, label: str | None = None) -> FeatureRecord:
    """Run one transformer on an image path or a loaded :class:`GrayImage`.

    Clouds that cannot be triangulated (fewer than three points, or all on
    a line) give an all-zero record flagged ``degenerate``.
    """
    if isinstance(source, GrayImage):
        img = source
    else:
        img = load_gray(source)
        id = id if id is not None else Path(source).stem
    id = id or ""
    try:
        dgm = diagram(build_alpha(image_cloud(img, cfg)))
    except DegenerateInputError as exc:
        log.warning("%s: degenerate point cloud (%s); emitting zero features", id, exc)
        return FeatureRecord(id, label, np.zeros(cfg.shape).ravel(), cfg.shape, True)
    return FeatureRecord(id, label, featurize(dgm, cfg).ravel(), cfg.shape)


def scan_images(root: str | Path) -> list[tuple[Path, str | None]]:
    """Images directly in ``root`` (unlabelled) and in its subdirectories (labelled by name)."""
    root = Path(root)
    if not root.is_dir():
        raise NotADirectoryError(root)
    found = []
    for p in sorted(root.iterdir()):
        if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES:
            found.append((p, None))
        elif p.is_dir():
            found.extend((q, p.name) for q in sorted(p.iterdir())
                         if q.is_file() and q.suffix.lower() in IMAGE_SUFFIXES)
    return found


def worker_count(requested: int | None = None) -> int:
    n = requested if requested is not None else (os.cpu_count() or 1)
    cap = os.environ.get(THREADS_ENV)
    if cap:
        n = min(n, max(1, int(cap)))
    return max(1, n)


def _extract_job(job):
    path, label, cfg = job
    try:
        return extract(path, cfg, label=label)
    except (OSError, ValueError) as exc:
        log.error("%s: %s", path, exc)
        return None


@dataclass(frozen=True)
class BatchResult:
    written: int
    failed: int
    degenerate: int


def extract_batch(root: str | Path, cfg: TransformerConfig, out_path: str | Path,
                  workers: int | None = None) -> BatchResult:
    """Featurize every image under ``root`` and write one CSV row per image.

    Rows are ordered by (id, label) whatever the worker count, so the file
    is byte-for-byte reproducible.  Unreadable images are logged and skipped.
    """
    jobs = [(p, label, cfg) for p, label in scan_images(root)]
    n = worker_count(workers)
    if n == 1 or len(jobs) < 2:
        results = [_extract_job(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(n, len(jobs))) as pool:
            results = list(pool.map(_extract_job, jobs, chunksize=max(1, len(jobs) // (4 * n))))
    records = [r for r in results if r is not None]
    records.sort(key=lambda r: (r.id, r.label or ""))
    Path(out_path).write_text(format_csv(records, cfg.shape[0] * cfg.shape[1]))
    return BatchResult(len(records), len(results) - len(records), sum(r.degenerate for r in records))


def format_csv(records, width: int) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["id", "label"] + [f"f_{i}" for i in range(width)])
    for r in records:
        # repr gives the shortest decimal that round-trips
        w.writerow([r.id, r.label or ""] + [repr(float(v)) for v in r.values])
    return buf.getvalue()


def read_features_csv(path: str | Path, class_names: list[str] | None = None) -> LabeledFeatures:
    """Load a feature CSV; labels become class indices in sorted-name order."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][:2] != ["id", "label"]:
        raise ValueError(f"{path}: not a feature CSV")
    body = rows[1:]
    labels = [r[1] for r in body]
    if class_names is None:
        class_names = sorted(set(labels))
    lookup = {c: i for i, c in enumerate(class_names)}
    unknown = set(labels) - set(lookup)
    if unknown:
        raise ValueError(f"{path}: labels {sorted(unknown)} not among {class_names}")
    X = np.array([[float(v) for v in r[2:]] for r in body], dtype=float).reshape(len(body), len(rows[0]) - 2)
    return LabeledFeatures(X, np.array([lookup[l] for l in labels], dtype=int), class_names, [r[0] for r in body])


def write_features_csv(data: LabeledFeatures, path: str | Path) -> None:
    records = [FeatureRecord(i, data.class_names[y], x, (1, len(x)))
               for i, x, y in zip(data.ids, data.X, data.y)]
    Path(path).write_text(format_csv(records, data.X.shape[1]))


# --- single-input diagrams -----------------------------------------------------------

BUILDERS = {"rips": build_rips, "cech": build_cech, "alpha": build_alpha}


def load_cloud(path: str | Path, cfg: TransformerConfig | None = None) -> PointCloud:
    """A point-cloud text file, or an image converted with ``cfg``'s cloud method."""
    path = Path(path)
    if path.suffix.lower() in IMAGE_SUFFIXES:
        return image_cloud(load_gray(path), cfg or TransformerConfig())
    return read_points(path)


def diagram_for(pc: PointCloud, complex_kind: str, squared: bool = False, **kw) -> PersistenceDiagram:
    if complex_kind not in BUILDERS:
        raise ValueError(f"unknown complex {complex_kind!r}")
    dgm = diagram(BUILDERS[complex_kind](pc, **kw))
    return dgm.squared() if squared else dgm


def diagram_cmd(input_path: str | Path, complex_kind: str, out_path: str | Path,
                squared: bool = False, cfg: TransformerConfig | None = None, **kw) -> PersistenceDiagram:
    """Write ``dim birth death`` lines for one point file or image."""
    dgm = diagram_for(load_cloud(input_path, cfg), complex_kind, squared, **kw)
    Path(out_path).write_text(dgm.to_text())
    return dgm


def with_overrides(cfg: TransformerConfig, **kw) -> TransformerConfig:
    return replace(cfg, **{k: v for k, v in kw.items() if v is not None})
