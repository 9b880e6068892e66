"""Fixed-layout feature vectors.

Layout, for a ``G x G`` block grid and Zernike order ``n_max``:

1. block means of the luminance, density, thickness and orientation maps,
   map by map, blocks in raster order (``4 G^2`` entries);
2. mean, variance, third central moment and entropy of the gray levels
   inside the field of view (4 entries);
3. ``|A_nl|`` for every valid ``(n, l)`` with ``l >= 0``, ordered by ``n``
   then ``l``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError, DataError
from ..image_core import check_gray, grid_blocks
from .maps import (
    WindowSpec,
    luminance_map,
    vessel_density_map,
    vessel_orientation_map,
    vessel_thickness_map,
)
from .texture import TextureStats, texture_stats
from .zernike import ZernikeTable, valid_pairs, zernike_moments

MAP_KINDS = ("luminance", "density", "thickness", "orientation")
STAT_NAMES = ("mean", "variance", "skewness", "entropy")


@dataclass(frozen=True)
class FeatureSchema:
    grid: int = 1
    n_max: int = 6
    window: WindowSpec = field(default_factory=WindowSpec)

    def __post_init__(self):
        if self.grid < 1:
            raise ConfigError("grid must be >= 1")
        if self.n_max < 0:
            raise ConfigError("n_max must be >= 0")

    @property
    def schema_id(self) -> str:
        return f"fv1-g{self.grid}-z{self.n_max}-w{self.window.m}x{self.window.n}"

    @property
    def names(self) -> list[str]:
        out = [f"{kind}_b{k}" for kind in MAP_KINDS for k in range(self.grid ** 2)]
        out += list(STAT_NAMES)
        out += [f"zernike_{n}_{l}" for n, l in valid_pairs(self.n_max, nonnegative=True)]
        return out

    def __len__(self) -> int:
        return 4 * self.grid ** 2 + 4 + len(valid_pairs(self.n_max, nonnegative=True))


def compute_maps(gray: np.ndarray, vessels: np.ndarray, window: WindowSpec) -> dict[str, np.ndarray]:
    gray = check_gray(gray)
    vessels = np.asarray(vessels, dtype=bool)
    if vessels.shape != gray.shape:
        raise DataError(f"vessel mask {vessels.shape} does not match image {gray.shape}")
    return {
        "luminance": luminance_map(gray, window),
        "density": vessel_density_map(vessels, window),
        "thickness": vessel_thickness_map(vessels, window),
        "orientation": vessel_orientation_map(vessels, window),
    }


def build_feature_vector(
    maps: dict[str, np.ndarray],
    stats: TextureStats,
    zernike: ZernikeTable,
    schema: FeatureSchema,
) -> np.ndarray:
    if set(maps) != set(MAP_KINDS):
        raise ConfigError(f"expected maps {MAP_KINDS}, got {sorted(maps)}")
    if zernike.n_max != schema.n_max:
        raise ConfigError(f"Zernike table order {zernike.n_max} != schema order {schema.n_max}")
    h, w = maps["luminance"].shape
    grid = grid_blocks(w, h, schema.grid)
    values: list[float] = []
    for kind in MAP_KINDS:
        m = maps[kind]
        if m.shape != (h, w):
            raise DataError(f"map {kind} has shape {m.shape}, expected {(h, w)}")
        values.extend(float(m[blk.slices].mean()) for blk in grid)
    values.extend(stats.as_tuple())
    values.extend(zernike.magnitudes())
    vec = np.asarray(values, dtype=np.float64)
    if vec.size != len(schema):
        raise ConfigError(f"vector length {vec.size} != schema length {len(schema)}")
    if not np.all(np.isfinite(vec)):
        raise DataError("non-finite feature value")
    return vec


def extract_features(
    gray: np.ndarray,
    vessels: np.ndarray,
    schema: FeatureSchema = FeatureSchema(),
    region: np.ndarray | None = None,
    texture: np.ndarray | None = None,
) -> np.ndarray:
    """Feature vector of a preprocessed gray image and its vessel map.

    ``texture`` is the gray image the statistics and Zernike moments are
    taken from (defaults to ``gray``); passing an image that was not
    histogram-equalised keeps the gray-level distribution informative.
    ``region`` limits the statistics, typically to the field of view. The
    Zernike moments use the largest centred square scaled to ``[0, 1]``.
    """
    gray = check_gray(gray)
    texture = gray if texture is None else check_gray(texture)
    if texture.shape != gray.shape:
        raise DataError("texture image does not match the gray image")
    maps = compute_maps(gray, vessels, schema.window)
    pixels = texture if region is None else texture[region]
    if pixels.size == 0:
        pixels = texture
    stats = texture_stats(pixels)
    h, w = texture.shape
    side = min(h, w)
    y0, x0 = (h - side) // 2, (w - side) // 2
    patch = texture[y0:y0 + side, x0:x0 + side] / 255.0
    table = zernike_moments(patch, schema.n_max)
    return build_feature_vector(maps, stats, table, schema)
