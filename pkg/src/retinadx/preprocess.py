"""Contrast enhancement and noise removal for fundus images."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import ConfigError
from .image_core import GrayMode, check_color, check_gray, to_gray

LEVELS = 256


@dataclass(frozen=True)
class Histogram:
    counts: np.ndarray  # int64, 256 bins

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def probabilities(self) -> np.ndarray:
        return self.counts / self.total


@dataclass(frozen=True)
class PreprocessConfig:
    median_kernel: int = 5
    equalize: bool = True
    gray_mode: GrayMode = "green"

    def __post_init__(self):
        if self.median_kernel < 1 or self.median_kernel % 2 == 0:
            raise ConfigError(f"median_kernel must be odd and >= 1, got {self.median_kernel}")
        if self.gray_mode not in ("green", "luminance"):
            raise ConfigError(f"unknown gray mode {self.gray_mode!r}")


def histogram(img: np.ndarray, mask: np.ndarray | None = None) -> Histogram:
    img = check_gray(img)
    values = img if mask is None else img[mask]
    return Histogram(np.bincount(values.ravel(), minlength=LEVELS).astype(np.int64))


def equalization_lut(hist: Histogram) -> np.ndarray:
    """Lookup table ``round(255 (cdf(v) - cdf_min) / (total - cdf_min))``.

    ``cdf_min`` is the cumulative count at the lowest occupied level. When a
    single level is occupied the denominator is zero and every level maps
    to 0.
    """
    cdf = np.cumsum(hist.counts)
    total = int(cdf[-1])
    cdf_min = int(cdf[np.flatnonzero(hist.counts)[0]]) if total else 0
    denom = total - cdf_min
    if denom == 0:
        return np.zeros(LEVELS, dtype=np.uint8)
    scaled = (cdf - cdf_min).clip(min=0) * 255.0 / denom
    return np.floor(scaled + 0.5).astype(np.uint8)


def histogram_equalize(img: np.ndarray) -> np.ndarray:
    img = check_gray(img)
    return equalization_lut(histogram(img))[img]


def median_filter(img: np.ndarray, k: int) -> np.ndarray:
    """``k x k`` median filter with edge replication at the borders."""
    img = check_gray(img)
    if k < 1 or k % 2 == 0:
        raise ConfigError(f"median window must be odd and >= 1, got {k}")
    if k == 1:
        return img.copy()
    return ndimage.median_filter(img, size=k, mode="nearest")


def preprocess(img: np.ndarray, cfg: PreprocessConfig = PreprocessConfig()) -> np.ndarray:
    """Gray conversion, optional histogram equalization, then median filtering."""
    img = check_color(img)
    gray = to_gray(img, cfg.gray_mode)
    if cfg.equalize:
        gray = histogram_equalize(gray)
    return median_filter(gray, cfg.median_kernel)


def fov_mask(gray: np.ndarray, fraction: float = 0.25) -> np.ndarray:
    """Disk covering the bright circular fundus field.

    Pixels above ``fraction`` of the 99th percentile are taken as the field
    of view, and a disk with the same centroid and area is returned. The
    dark surround outside this disk is ignored by later statistics.
    """
    gray = check_gray(gray)
    h, w = gray.shape
    level = max(1.0, fraction * float(np.percentile(gray, 99)))
    inside = gray > level
    area = int(inside.sum())
    if area == 0 or area == gray.size:
        return np.ones_like(gray, dtype=bool)
    ys, xs = np.nonzero(inside)
    cy, cx = ys.mean(), xs.mean()
    radius = np.sqrt(area / np.pi)
    yy, xx = np.mgrid[0:h, 0:w]
    return (yy - cy) ** 2 + (xx - cx) ** 2 <= radius ** 2
