"""Grayscale rasters and the two image-to-point-cloud conversions."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image
from scipy import ndimage

from .pointcloud import PointCloud

NONZERO_EPS = 1.0 / 512.0
DEFAULT_FRACTION = 0.05
DEFAULT_GRID = 64
EIGHT_CONNECTED = np.ones((3, 3), dtype=int)


class ImageFormatError(ValueError):
    pass


@dataclass(frozen=True)
class GrayImage:
    """Row-major intensities in [0, 1]; ``data[row, col]``."""

    data: np.ndarray
    bit_depth_origin: int = 8

    def __post_init__(self):
        a = np.asarray(self.data, dtype=float)
        if a.ndim != 2:
            raise ValueError("image data must be 2-D")
        if a.size and (a.min() < 0 or a.max() > 1):
            raise ValueError("intensities must lie in [0, 1]")
        if self.bit_depth_origin not in (8, 16):
            raise ValueError("bit depth must be 8 or 16")
        a.setflags(write=False)
        object.__setattr__(self, "data", a)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class BinaryMask:
    data: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.data).astype(np.uint8)
        if a.ndim != 2 or np.any(a > 1):
            raise ValueError("mask must be a 2-D array of zeros and ones")
        a.setflags(write=False)
        object.__setattr__(self, "data", a)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]


# --- reading / writing ---------------------------------------------------------

_PGM_HEADER = re.compile(rb"(P[25])((?:\s+(?:#[^\n\r]*)?)+\d+){3}")
_PGM_FIELD = re.compile(rb"\d+")
_COMMENT = re.compile(rb"#[^\n\r]*")


def read_pgm_raw(path: str | Path) -> tuple[np.ndarray, int]:
    """Integer pixel array and maxval of a P2 (ASCII) or P5 (binary) file."""
    buf = Path(path).read_bytes()
    m = _PGM_HEADER.match(buf)
    if m is None:
        raise ImageFormatError(f"{path}: not a grayscale PGM")
    header = _COMMENT.sub(b"", buf[2:m.end()])
    w, h, maxval = (int(t) for t in _PGM_FIELD.findall(header))
    if not 0 < maxval < 65536:
        raise ImageFormatError(f"{path}: unsupported maxval {maxval}")
    if m.group(1) == b"P2":
        tokens = _COMMENT.sub(b"", buf[m.end():]).split()
        arr = np.array([int(t) for t in tokens[: w * h]], dtype=np.int64)
        if arr.size != w * h:
            raise ImageFormatError(f"{path}: expected {w * h} pixels, got {arr.size}")
    else:
        start = m.end() + 1  # a single whitespace byte follows maxval
        dtype = ">u1" if maxval < 256 else ">u2"
        n = w * h * np.dtype(dtype).itemsize
        raw = buf[start:start + n]
        if len(raw) != n:
            raise ImageFormatError(f"{path}: truncated pixel data")
        arr = np.frombuffer(raw, dtype=dtype).astype(np.int64)
    if arr.max(initial=0) > maxval:
        raise ImageFormatError(f"{path}: pixel exceeds maxval")
    return arr.reshape(h, w), maxval


def load_gray(path: str | Path) -> GrayImage:
    """Load an 8/16-bit single-channel PGM or PNG scaled into [0, 1]."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(path)
    with path.open("rb") as fh:
        head = fh.read(2)
    if head in (b"P2", b"P5"):
        arr, maxval = read_pgm_raw(path)
        bits = 8 if maxval < 256 else 16
        return GrayImage(arr / maxval, bits)
    try:
        with Image.open(path) as im:
            mode = im.mode
            arr = np.array(im)
    except (OSError, SyntaxError) as exc:
        raise ImageFormatError(f"{path}: unreadable image ({exc})") from exc
    if mode == "L":
        return GrayImage(arr / 255.0, 8)
    if mode.startswith("I;16") or mode == "I":
        if arr.min(initial=0) < 0 or arr.max(initial=0) > 65535:
            raise ImageFormatError(f"{path}: values outside the 16-bit range")
        return GrayImage(arr / 65535.0, 16)
    if mode == "1":
        raise ImageFormatError(f"{path}: 1-bit images are not supported")
    raise ImageFormatError(f"{path}: expected a single-channel image, got mode {mode}")


def to_uint(data: np.ndarray, bits: int) -> np.ndarray:
    top = (1 << bits) - 1
    return np.rint(np.clip(data, 0, 1) * top).astype(np.uint16 if bits == 16 else np.uint8)


def save_png(img: GrayImage, path: str | Path, bits: int = 16) -> None:
    arr = to_uint(img.data, bits)
    Image.fromarray(arr).save(path)  # uint16 -> I;16, uint8 -> L


def write_pgm(values: np.ndarray, path: str | Path, maxval: int = 255) -> None:
    """Write an integer array as binary PGM (P5)."""
    values = np.asarray(values)
    h, w = values.shape
    dtype = ">u1" if maxval < 256 else ">u2"
    Path(path).write_bytes(f"P5\n{w} {h}\n{maxval}\n".encode() + values.astype(dtype).tobytes())


# --- point-cloud generation -----------------------------------------------------

def threshold_top_fraction(img: GrayImage, fraction: float = DEFAULT_FRACTION) -> BinaryMask:
    """Mark the brightest ``fraction`` of pixels.

    The cut-off is the intensity of the ceil(fraction * N)-th brightest
    pixel, and every pixel at least that bright is kept, so ties can push the
    count above fraction * N.
    """
    if not 0 < fraction <= 1:
        raise ValueError("fraction must lie in (0, 1]")
    flat = img.data.ravel()
    if flat.size == 0:
        raise ValueError("empty image")
    k = max(1, math.ceil(round(fraction * flat.size, 9)))
    cut = np.partition(flat, flat.size - k)[flat.size - k]
    return BinaryMask(img.data >= cut)


def block_average(img: GrayImage, grid: int) -> np.ndarray:
    """grid x grid block means; the last block in each axis absorbs the remainder."""
    if grid <= 0:
        raise ValueError("grid must be positive")
    if grid > min(img.width, img.height):
        raise ValueError(f"grid {grid} exceeds image size {img.width}x{img.height}")
    bh, bw = img.height // grid, img.width // grid
    rows = np.arange(grid) * bh
    cols = np.arange(grid) * bw
    sums = np.add.reduceat(np.add.reduceat(img.data, rows, axis=0), cols, axis=1)
    rh = np.diff(np.append(rows, img.height))
    cw = np.diff(np.append(cols, img.width))
    return sums / np.outer(rh, cw)


def resize_pointcloud(img: GrayImage, grid: int = DEFAULT_GRID, eps: float = NONZERO_EPS) -> PointCloud:
    """Downsample to grid x grid and emit the centre of every lit cell.

    Points are (col + 0.5, row + 0.5) in grid units, in row-major order.
    """
    small = block_average(img, grid)
    rows, cols = np.nonzero(small > eps)
    return PointCloud(np.column_stack([cols + 0.5, rows + 0.5]), "resize")


def label_components(mask: BinaryMask) -> tuple[np.ndarray, int]:
    return ndimage.label(mask.data, structure=EIGHT_CONNECTED)


def contour_pointcloud(img: GrayImage, fraction: float = DEFAULT_FRACTION, min_area: int = 1) -> PointCloud:
    """One point per 8-connected bright region, at its pixel centroid (x = col, y = row)."""
    return mask_centroids(threshold_top_fraction(img, fraction), min_area)


def mask_centroids(mask: BinaryMask, min_area: int = 1) -> PointCloud:
    labels, n = label_components(mask)
    if n == 0:
        return PointCloud(np.empty((0, 2)), "contour")
    idx = np.arange(1, n + 1)
    area = ndimage.sum_labels(np.ones_like(labels), labels, idx)
    rows, cols = np.indices(labels.shape)
    cy = ndimage.sum_labels(rows, labels, idx) / area
    cx = ndimage.sum_labels(cols, labels, idx) / area
    keep = area >= min_area
    return PointCloud(np.column_stack([cx[keep], cy[keep]]), "contour")
