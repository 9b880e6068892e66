"""Statistical texture descriptors of gray-level windows."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, DataError, DegenerateInputError, DimensionMismatchError
from ..preprocess import LEVELS, Histogram

_LEVELS = np.arange(LEVELS, dtype=np.float64)


def central_moment(hist: Histogram, n: int) -> float:
    """``sum_i (z_i - m)^n p(z_i)`` over the 256 gray levels."""
    if n < 0:
        raise ConfigError("moment order must be >= 0")
    total = hist.total
    if total <= 0:
        raise DegenerateInputError("central moment of an empty histogram")
    p = hist.counts / total
    m = float(np.dot(_LEVELS, p))
    return float(np.dot((_LEVELS - m) ** n, p))


@dataclass(frozen=True)
class TextureStats:
    mean: float
    variance: float
    skewness: float  # third central moment, not normalised
    entropy: float  # nats

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.mean, self.variance, self.skewness, self.entropy)


def histogram_entropy(hist: Histogram) -> float:
    p = hist.counts[hist.counts > 0] / hist.total
    return float(-np.sum(p * np.log(p)))


def texture_stats(pixels: np.ndarray) -> TextureStats:
    """Mean, variance, third central moment and entropy of a gray window."""
    values = np.asarray(pixels).ravel()
    if values.size == 0:
        raise DegenerateInputError("texture statistics of an empty window")
    if values.min() < 0 or values.max() >= LEVELS:
        raise DataError(f"gray levels must lie in [0, {LEVELS - 1}]")
    hist = Histogram(np.bincount(values.astype(np.int64), minlength=LEVELS))
    p = hist.counts / hist.total
    m = float(np.dot(_LEVELS, p))
    return TextureStats(
        mean=m,
        variance=central_moment(hist, 2),
        skewness=central_moment(hist, 3),
        entropy=histogram_entropy(hist),
    )


def silverman_bandwidth(values: np.ndarray) -> float:
    """Silverman's rule of thumb ``1.06 * sd * n^(-1/5)``."""
    x = np.asarray(values, dtype=np.float64).ravel()
    sd = float(x.std(ddof=1)) if x.size > 1 else 0.0
    return 1.06 * sd * x.size ** (-0.2)


def entropy_parzen(values: np.ndarray, h: float | None = None, chunk: int = 512) -> float:
    """Resubstitution entropy estimate with a Gaussian Parzen window.

    ``H = -(1/N) sum_i ln( (1/N) sum_j g_h(z_i - z_j) )``. ``h`` defaults to
    Silverman's rule; a constant window needs an explicit ``h``.
    """
    z = np.asarray(values, dtype=np.float64).ravel()
    if z.size == 0:
        raise DegenerateInputError("entropy of an empty window")
    if h is None:
        h = silverman_bandwidth(z)
    if not h > 0:
        raise ConfigError(f"kernel width must be > 0, got {h}")
    n = z.size
    norm = 1.0 / (math.sqrt(2.0 * math.pi) * h * n)
    total = 0.0
    for start in range(0, n, chunk):
        d = (z[start:start + chunk, None] - z[None, :]) / h
        density = np.exp(-0.5 * d * d).sum(axis=1) * norm
        total += float(np.log(density).sum())
    return -total / n


def correlation_distance(xr: np.ndarray, xs: np.ndarray) -> float:
    """One minus the Pearson correlation of two vectors, in ``[0, 2]``."""
    a = np.asarray(xr, dtype=np.float64).ravel()
    b = np.asarray(xs, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise DimensionMismatchError(f"vector lengths differ: {a.size} vs {b.size}")
    if a.size < 2:
        raise DegenerateInputError("correlation distance needs at least two components")
    a = a - a.mean()
    b = b - b.mean()
    na = math.sqrt(float(a @ a))
    nb = math.sqrt(float(b @ b))
    if na == 0.0 or nb == 0.0:
        raise DegenerateInputError("correlation distance is undefined for a constant vector")
    return min(2.0, max(0.0, 1.0 - float(a @ b) / (na * nb)))
