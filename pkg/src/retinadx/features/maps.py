"""Windowed vascular structure maps.

Every map value at ``(i, j)`` summarises the ``M x N`` window centred on
that pixel; windows reaching past the border see replicated edge pixels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from ..errors import ConfigError
from ..image_core import check_gray


@dataclass(frozen=True)
class WindowSpec:
    m: int = 15  # height
    n: int = 15  # width

    def __post_init__(self):
        if self.m < 1 or self.n < 1 or self.m % 2 == 0 or self.n % 2 == 0:
            raise ConfigError(f"window sides must be odd and >= 1, got {self.m}x{self.n}")

    @property
    def area(self) -> int:
        return self.m * self.n


def window_sum(values: np.ndarray, w: WindowSpec) -> np.ndarray:
    """Sum over centred ``M x N`` windows via an integral image.

    Integer input gives exact integer sums.
    """
    values = np.asarray(values)
    acc = np.int64 if values.dtype.kind in "biu" else np.float64
    pm, pn = w.m // 2, w.n // 2
    padded = np.pad(values.astype(acc), ((pm, pm), (pn, pn)), mode="edge")
    ii = np.zeros((padded.shape[0] + 1, padded.shape[1] + 1), dtype=acc)
    ii[1:, 1:] = padded.cumsum(0).cumsum(1)
    h, wd = values.shape
    return (ii[w.m:w.m + h, w.n:w.n + wd] - ii[:h, w.n:w.n + wd]
            - ii[w.m:w.m + h, :wd] + ii[:h, :wd])


def luminance_map(img: np.ndarray, w: WindowSpec = WindowSpec()) -> np.ndarray:
    """Local mean brightness."""
    img = np.asarray(img)
    if img.dtype == np.uint8:
        img = check_gray(img)
    return window_sum(img, w) / w.area


def vessel_density_map(b: np.ndarray, w: WindowSpec = WindowSpec()) -> np.ndarray:
    """Fraction of vessel pixels in each window."""
    return window_sum(np.asarray(b, dtype=bool).astype(np.int64), w) / w.area


_CROSS = ndimage.generate_binary_structure(2, 1)


def boundary_pixels(b: np.ndarray) -> np.ndarray:
    """Vessel pixels with at least one non-vessel 4-neighbour inside the image."""
    b = np.asarray(b, dtype=bool)
    return b & ~ndimage.binary_erosion(b, structure=_CROSS, border_value=1)


def vessel_thickness_map(b: np.ndarray, w: WindowSpec = WindowSpec()) -> np.ndarray:
    """Vessel area over vessel boundary length, per window.

    A one-pixel line scores 1, a solid bar of width ``k`` scores ``k / 2``.
    Windows without vessel pixels score 0; windows lying wholly inside a
    vessel (no boundary pixel) divide by one.
    """
    b = np.asarray(b, dtype=bool)
    area = window_sum(b.astype(np.int64), w)
    edge = window_sum(boundary_pixels(b).astype(np.int64), w)
    return np.where(area > 0, area / np.maximum(edge, 1), 0.0)


def orientation_vectors(b: np.ndarray, sigma: float = 1.0, tensor_sigma: float = 2.0) -> np.ndarray:
    """Unit doubled-angle vectors of the local vessel direction.

    Returns an array ``(2, H, W)`` holding ``(cos 2a, sin 2a)`` where ``a`` is
    the direction along the vessel, measured counter-clockwise from the x axis
    with y pointing up. Non-vessel pixels get the zero vector.
    """
    b = np.asarray(b, dtype=bool)
    f = ndimage.gaussian_filter(b.astype(np.float64), sigma, mode="nearest")
    gy_down, gx = np.gradient(f)
    gy = -gy_down
    jxx = ndimage.gaussian_filter(gx * gx, tensor_sigma, mode="nearest")
    jyy = ndimage.gaussian_filter(gy * gy, tensor_sigma, mode="nearest")
    jxy = ndimage.gaussian_filter(gx * gy, tensor_sigma, mode="nearest")
    # gradient doubled angle is (jxx - jyy, 2 jxy); the vessel runs perpendicular
    c = jyy - jxx
    s = -2.0 * jxy
    norm = np.hypot(c, s)
    ok = b & (norm > 1e-12)
    safe = np.where(ok, norm, 1.0)
    return np.stack([np.where(ok, c / safe, 0.0), np.where(ok, s / safe, 0.0)])


def vessel_orientation_map(b: np.ndarray, w: WindowSpec = WindowSpec()) -> np.ndarray:
    """Mean vessel direction per window in degrees, in ``(-90, 90]``.

    Axial data are averaged as doubled-angle vectors, so 89 and -89 degrees
    average to 90 rather than 0. Windows without vessels score 0.
    """
    b = np.asarray(b, dtype=bool)
    vec = orientation_vectors(b)
    sc = window_sum(vec[0], w)
    ss = window_sum(vec[1], w)
    ang = 0.5 * np.degrees(np.arctan2(ss, sc))
    ang = np.where(ang <= -90.0, ang + 180.0, ang)
    has = window_sum(b.astype(np.int64), w) > 0
    return np.where(has & (np.hypot(sc, ss) > 1e-9), ang, 0.0)
