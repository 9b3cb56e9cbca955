"""Baseline classifier, segmentation IoU and a synthetic three-class image set."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from .imaging import GrayImage, save_png


# --- learning-rate schedule and loss --------------------------------------------

@dataclass(frozen=True)
class ScheduleState:
    eta_max: float
    eta_min: float
    T_max: int
    T_cur: float = 0

    def __post_init__(self):
        if self.eta_min > self.eta_max:
            raise ValueError("eta_min must not exceed eta_max")
        if self.T_max <= 0:
            raise ValueError("T_max must be positive")
        if not 0 <= self.T_cur <= self.T_max:
            raise ValueError("T_cur must lie in [0, T_max]")


def cosine_lr(s: ScheduleState) -> float:
    """eta_min + (eta_max - eta_min) * (1 + cos(pi * T_cur / T_max)) / 2."""
    return s.eta_min + 0.5 * (s.eta_max - s.eta_min) * (1.0 + math.cos(math.pi * s.T_cur / s.T_max))


def log_softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - np.max(logits, axis=-1, keepdims=True)
    return z - np.log(np.sum(np.exp(z), axis=-1, keepdims=True))


def cross_entropy(logits, label: int) -> float:
    """-log softmax(logits)[label], stable for large logits."""
    x = np.asarray(logits, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("logits must be finite")
    m = x.max()
    if x[label] == m:
        # log1p keeps precision when the true class dominates
        return float(np.log1p(np.exp(np.delete(x, label) - m).sum()))
    return float(m - x[label] + np.log(np.exp(x - m).sum()))


def cross_entropy_grad(logits, label: int) -> np.ndarray:
    """Gradient of :func:`cross_entropy` with respect to the logits."""
    p = np.exp(log_softmax(np.asarray(logits, dtype=float)))
    p[label] -= 1.0
    return p


# --- logistic baseline -----------------------------------------------------------

@dataclass
class LabeledFeatures:
    X: np.ndarray
    y: np.ndarray
    class_names: list[str]
    ids: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        self.y = np.asarray(self.y, dtype=int)
        if self.X.ndim != 2 or len(self.X) != len(self.y):
            raise ValueError("X must be (rows, features) with one label per row")
        if len(self.y) and (self.y.min() < 0 or self.y.max() >= len(self.class_names)):
            raise ValueError("labels must index class_names")

    def __len__(self) -> int:
        return len(self.y)

    def subset(self, idx) -> "LabeledFeatures":
        ids = [self.ids[i] for i in idx] if self.ids else []
        return LabeledFeatures(self.X[idx], self.y[idx], list(self.class_names), ids)


def stratified_split(data: LabeledFeatures, test_fraction: float = 0.2,
                     seed: int = 0) -> tuple[LabeledFeatures, LabeledFeatures]:
    """Seeded per-class shuffle, the last ``test_fraction`` of each class held out."""
    rng = np.random.default_rng(seed)
    train, test = [], []
    for c in range(len(data.class_names)):
        idx = np.flatnonzero(data.y == c)
        rng.shuffle(idx)
        n_test = int(round(test_fraction * len(idx)))
        test.extend(idx[len(idx) - n_test:])
        train.extend(idx[:len(idx) - n_test])
    return data.subset(np.sort(train)), data.subset(np.sort(test))


@dataclass
class LogisticModel:
    weights: np.ndarray  # (features + 1, classes); last row is the bias
    mean: np.ndarray
    scale: np.ndarray
    class_names: list[str]
    loss_trace: list[float] = field(default_factory=list)

    def logits(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != len(self.mean):
            raise ValueError(f"expected {len(self.mean)} features, got {X.shape[-1]}")
        Z = (X - self.mean) / self.scale
        return Z @ self.weights[:-1] + self.weights[-1]

    def predict(self, X: np.ndarray) -> np.ndarray:
        # argmax returns the lowest index among ties
        return np.argmax(self.logits(X), axis=1)

    def to_json(self) -> str:
        return json.dumps({
            "class_names": self.class_names,
            "mean": self.mean.tolist(),
            "scale": self.scale.tolist(),
            "weights": self.weights.tolist(),
            "loss_trace": self.loss_trace,
        })

    @classmethod
    def from_json(cls, text: str) -> "LogisticModel":
        d = json.loads(text)
        return cls(np.array(d["weights"], dtype=float), np.array(d["mean"], dtype=float),
                   np.array(d["scale"], dtype=float), list(d["class_names"]), list(d.get("loss_trace", [])))


def train_logistic(data: LabeledFeatures, epochs: int = 100, batch: int = 32, eta_max: float = 0.1,
                   eta_min: float = 0.0, seed: int = 0) -> LogisticModel:
    """Multinomial logistic regression by minibatch SGD on mean cross-entropy.

    Features are z-scored with the training statistics.  The step size
    follows the cosine schedule, updated once per epoch.
    """
    if len(data) == 0:
        raise ValueError("no training rows")
    n_classes = len(data.class_names)
    if n_classes < 2 or len(np.unique(data.y)) < 2:
        raise ValueError("need at least two classes")
    if not np.all(np.isfinite(data.X)):
        raise ValueError("features must be finite")
    mean = data.X.mean(axis=0)
    scale = data.X.std(axis=0)
    scale[scale == 0] = 1.0
    Z = np.hstack([(data.X - mean) / scale, np.ones((len(data), 1))])
    Y = np.eye(n_classes)[data.y]
    W = np.zeros((Z.shape[1], n_classes))
    rng = np.random.default_rng(seed)
    trace = []
    for epoch in range(epochs):
        lr = cosine_lr(ScheduleState(eta_max, eta_min, epochs, epoch))
        order = rng.permutation(len(data))
        total = 0.0
        for start in range(0, len(order), batch):
            b = order[start:start + batch]
            logp = log_softmax(Z[b] @ W)
            total -= float(np.sum(logp * Y[b]))
            W -= lr * Z[b].T @ (np.exp(logp) - Y[b]) / len(b)
        trace.append(total / len(data))
    return LogisticModel(W, mean, scale, list(data.class_names), trace)


@dataclass(frozen=True)
class EvalResult:
    accuracy: float
    confusion: np.ndarray  # rows: true class, columns: predicted class


def evaluate(model: LogisticModel, data: LabeledFeatures) -> EvalResult:
    pred = model.predict(data.X)
    n = len(model.class_names)
    conf = np.zeros((n, n), dtype=int)
    np.add.at(conf, (data.y, pred), 1)
    acc = float(np.mean(pred == data.y)) if len(data) else 0.0
    return EvalResult(acc, conf)


# --- segmentation IoU -------------------------------------------------------------

@dataclass(frozen=True)
class IoUReport:
    per_class: tuple[Fraction, ...]
    absent: tuple[bool, ...]  # class missing from both masks; its IoU is 1 by convention

    @property
    def total(self) -> Fraction:
        return sum(self.per_class, Fraction(0)) / len(self.per_class)

    @property
    def total_present(self) -> Fraction:
        vals = [v for v, a in zip(self.per_class, self.absent) if not a]
        return sum(vals, Fraction(0)) / len(vals) if vals else Fraction(1)


def iou_scores(pred, truth, n_classes: int) -> IoUReport:
    """Per-class intersection over union of two label masks, as exact fractions."""
    pred, truth = np.asarray(pred), np.asarray(truth)
    if pred.shape != truth.shape:
        raise ValueError(f"mask shapes differ: {pred.shape} vs {truth.shape}")
    if pred.size and max(pred.max(), truth.max()) >= n_classes:
        raise ValueError("mask value exceeds class count")
    scores, absent = [], []
    for c in range(n_classes):
        p, t = pred == c, truth == c
        union = int(np.count_nonzero(p | t))
        inter = int(np.count_nonzero(p & t))
        scores.append(Fraction(inter, union) if union else Fraction(1))
        absent.append(union == 0)
    return IoUReport(tuple(scores), tuple(absent))


# --- synthetic dataset ---------------------------------------------------------------

@dataclass(frozen=True)
class BlobClass:
    name: str
    count: tuple[int, int]  # inclusive range
    sigma: float
    amplitude: tuple[float, float] = (0.5, 1.0)


SYNTH_CLASSES = (
    BlobClass("dense_small", (80, 120), 2.0),
    BlobClass("sparse_small", (15, 30), 2.0),
    BlobClass("few_large", (5, 10), 8.0),
)
SYNTH_SIZE = 256


def render_blobs(centers: np.ndarray, sigma: float, amplitudes: np.ndarray, size: int) -> np.ndarray:
    """Sum of isotropic Gaussians clipped to [0, 1]; each blob drawn in a 4-sigma window."""
    img = np.zeros((size, size))
    r = int(math.ceil(4 * sigma))
    for (cx, cy), a in zip(centers, amplitudes):
        x0, x1 = max(0, int(cx) - r), min(size, int(cx) + r + 1)
        y0, y1 = max(0, int(cy) - r), min(size, int(cy) + r + 1)
        xs = np.arange(x0, x1) + 0.5 - cx
        ys = np.arange(y0, y1) + 0.5 - cy
        img[y0:y1, x0:x1] += a * np.exp(-(ys[:, None] ** 2 + xs[None, :] ** 2) / (2 * sigma * sigma))
    return np.clip(img, 0.0, 1.0)


@dataclass(frozen=True)
class SynthImage:
    name: str
    label: str
    image: GrayImage
    n_blobs: int


def synth_dataset(n_per_class: int, seed: int, size: int = SYNTH_SIZE,
                  classes: Sequence[BlobClass] = SYNTH_CLASSES) -> list[SynthImage]:
    """Seeded Gaussian-blob images, ``n_per_class`` for each blob class."""
    if n_per_class < 1:
        raise ValueError("n_per_class must be at least 1")
    root = np.random.SeedSequence(seed)
    out = []
    for cls, child in zip(classes, root.spawn(len(classes))):
        for i, grand in enumerate(child.spawn(n_per_class)):
            rng = np.random.Generator(np.random.PCG64(grand))
            n = int(rng.integers(cls.count[0], cls.count[1] + 1))
            margin = 2 * cls.sigma
            centers = rng.uniform(margin, size - margin, size=(n, 2))
            amps = rng.uniform(*cls.amplitude, size=n)
            data = render_blobs(centers, cls.sigma, amps, size)
            out.append(SynthImage(f"{cls.name}_{i:04d}", cls.name, GrayImage(data, 16), n))
    return out


def write_dataset(images: Sequence[SynthImage], root: str | Path) -> int:
    """Write 16-bit PNGs into one subdirectory per label."""
    root = Path(root)
    for item in images:
        d = root / item.label
        d.mkdir(parents=True, exist_ok=True)
        save_png(item.image, d / f"{item.name}.png", bits=16)
    return len(images)
