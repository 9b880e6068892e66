"""Deterministic synthetic fundus images with ground-truth masks.

A circular field with radial fall-off carries a bright disc from which a
binary-branching tree of dark, Gaussian-profile vessels grows. Drusen
images add flat-topped yellowish blobs; diabetic retinopathy images add
small dark dots and bright irregular patches. Everything is a function of
the parameters, so a seed reproduces the image bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import ConfigError
from .labels import ClassLabel

FUNDUS_RGB = np.array([190.0, 95.0, 45.0])
DISC_RGB = np.array([50.0, 70.0, 40.0])
# per-channel weight of a vessel / lesion intensity change (green = 1)
VESSEL_TINT = np.array([0.5, 1.0, 0.3])
DRUSEN_TINT = np.array([0.8, 1.0, 0.5])
DOT_TINT = np.array([0.3, 1.0, 0.4])


@dataclass(frozen=True)
class SynthParams:
    class_label: ClassLabel = ClassLabel.NORMAL
    seed: int = 0
    size: int = 256
    branching_depth: int = 4
    num_trunks: int = 4
    trunk_width: float = 5.0
    min_width: float = 2.0
    vessel_contrast: float = 45.0
    gradient: float = 0.35
    noise: float = 3.0
    lesion_contrast: float = 30.0
    drusen_count: tuple[int, int] = (6, 12)
    drusen_radius: tuple[float, float] = (3.5, 7.0)
    dot_count: tuple[int, int] = (10, 20)
    dot_radius: tuple[float, float] = (1.5, 2.5)
    patch_count: tuple[int, int] = (2, 4)
    patch_radius: tuple[float, float] = (2.5, 4.5)

    def __post_init__(self):
        object.__setattr__(self, "class_label", ClassLabel.parse(self.class_label))
        if self.size < 64:
            raise ConfigError("size must be >= 64")
        if self.branching_depth < 0 or self.num_trunks < 1:
            raise ConfigError("branching_depth must be >= 0 and num_trunks >= 1")
        for name in ("drusen_count", "dot_count", "patch_count"):
            lo, hi = getattr(self, name)
            if lo < 0 or hi < lo:
                raise ConfigError(f"{name} must be a non-negative (lo, hi) range")
        for name in ("drusen_radius", "dot_radius", "patch_radius"):
            lo, hi = getattr(self, name)
            if lo <= 0 or hi < lo:
                raise ConfigError(f"{name} must be a positive (lo, hi) range")
        if self.min_width <= 0 or self.trunk_width < self.min_width:
            raise ConfigError("need 0 < min_width <= trunk_width")
        if self.noise < 0 or self.lesion_contrast < 0 or self.vessel_contrast < 0:
            raise ConfigError("noise and contrasts must be >= 0")


@dataclass
class GroundTruth:
    vessel_mask: np.ndarray
    lesion_mask: np.ndarray
    class_label: ClassLabel
    lesion_count: int
    fov_mask: np.ndarray


def _segment_distance(xx, yy, p0, p1):
    d = p1 - p0
    length2 = float(d @ d)
    if length2 == 0.0:
        return np.hypot(xx - p0[0], yy - p0[1])
    t = np.clip(((xx - p0[0]) * d[0] + (yy - p0[1]) * d[1]) / length2, 0.0, 1.0)
    return np.hypot(xx - (p0[0] + t * d[0]), yy - (p0[1] + t * d[1]))


class _Canvas:
    def __init__(self, size):
        self.size = size
        self.vessel_depth = np.zeros((size, size))
        self.vessel_mask = np.zeros((size, size), dtype=bool)

    def draw_segment(self, p0, p1, width, contrast):
        sigma = width / 2.5
        pad = int(np.ceil(3 * sigma)) + 1
        x0 = max(int(min(p0[0], p1[0])) - pad, 0)
        x1 = min(int(max(p0[0], p1[0])) + pad + 1, self.size)
        y0 = max(int(min(p0[1], p1[1])) - pad, 0)
        y1 = min(int(max(p0[1], p1[1])) + pad + 1, self.size)
        if x1 <= x0 or y1 <= y0:
            return
        yy, xx = np.mgrid[y0:y1, x0:x1].astype(np.float64)
        dist = _segment_distance(xx, yy, p0, p1)
        prof = contrast * np.exp(-dist ** 2 / (2 * sigma ** 2))
        view = self.vessel_depth[y0:y1, x0:x1]
        np.maximum(view, prof, out=view)
        self.vessel_mask[y0:y1, x0:x1] |= dist <= width / 2


def _grow_tree(canvas, rng, params, centre, radius, disc):
    limit = 0.92 * radius

    def inside(p):
        return np.hypot(p[0] - centre[0], p[1] - centre[1]) <= limit

    def branch(start, angle, length, width, contrast, depth):
        # three slightly bent pieces per branch
        pts = [start]
        heading = angle
        for _ in range(3):
            heading += rng.uniform(-12, 12)
            a = np.deg2rad(heading)
            nxt = pts[-1] + (length / 3) * np.array([np.cos(a), -np.sin(a)])
            if not inside(nxt):
                canvas.draw_segment(pts[-1], _clip_to_disk(pts[-1], nxt, centre, limit), width, contrast)
                return
            canvas.draw_segment(pts[-1], nxt, width, contrast)
            pts.append(nxt)
        if depth >= params.branching_depth:
            return
        child_w = max(params.min_width, width * 0.8)
        for sign in (-1, 1):
            branch(pts[-1], heading + sign * rng.uniform(20, 40), length * 0.75,
                   child_w, contrast * 0.95, depth + 1)

    base = 360.0 / params.num_trunks
    start_angle = rng.uniform(0, 360)
    for k in range(params.num_trunks):
        angle = start_angle + k * base + rng.uniform(-0.2, 0.2) * base
        branch(disc.copy(), angle, 0.35 * radius, params.trunk_width, params.vessel_contrast, 0)


def _clip_to_disk(p0, p1, centre, limit):
    # bisection for the last point of the segment inside the disk
    lo, hi = 0.0, 1.0
    for _ in range(30):
        mid = 0.5 * (lo + hi)
        q = p0 + mid * (p1 - p0)
        if np.hypot(q[0] - centre[0], q[1] - centre[1]) <= limit:
            lo = mid
        else:
            hi = mid
    return p0 + lo * (p1 - p0)


def _place_blobs(rng, count, radius_range, centre, radius, forbidden, taken, size):
    """Rejection-sample non-overlapping blob centres; returns (x, y, r) tuples."""
    placed = []
    clearance = ndimage.distance_transform_edt(~forbidden)
    for _ in range(count):
        for _attempt in range(200):
            r = rng.uniform(*radius_range)
            ang = rng.uniform(0, 2 * np.pi)
            rho = 0.85 * radius * np.sqrt(rng.uniform(0, 1))
            x = centre[0] + rho * np.cos(ang)
            y = centre[1] + rho * np.sin(ang)
            ix, iy = int(round(x)), int(round(y))
            if not (0 <= ix < size and 0 <= iy < size):
                continue
            if clearance[iy, ix] < r + 8:
                continue
            if any(np.hypot(x - bx, y - by) < r + br + 10 for bx, by, br in taken + placed):
                continue
            placed.append((x, y, r))
            break
    return placed


def generate_fundus(params: SynthParams) -> tuple[np.ndarray, GroundTruth]:
    """Render a synthetic fundus image and its ground truth."""
    size = params.size
    rng = np.random.default_rng(np.random.SeedSequence([params.seed, int(params.class_label)]))
    centre = np.array([(size - 1) / 2.0, (size - 1) / 2.0])
    radius = 0.46 * size
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    rr = np.hypot(xx - centre[0], yy - centre[1])
    fov = rr <= radius

    side = rng.choice([-1.0, 1.0])
    disc = centre + np.array([side * 0.3 * radius, rng.uniform(-0.05, 0.05) * radius])
    disc_r = 0.1 * radius

    illum = 1.0 - params.gradient * (rr / radius) ** 2
    rgb = FUNDUS_RGB[None, None, :] * illum[:, :, None]
    dd = np.hypot(xx - disc[0], yy - disc[1])
    disc_prof = 1.0 / (1.0 + np.exp((dd - disc_r) / 1.5))
    rgb = rgb + DISC_RGB[None, None, :] * disc_prof[:, :, None]

    canvas = _Canvas(size)
    _grow_tree(canvas, rng, params, centre, radius, disc)
    vessel_mask = canvas.vessel_mask & fov
    rgb = rgb - VESSEL_TINT[None, None, :] * canvas.vessel_depth[:, :, None]

    lesion_mask = np.zeros((size, size), dtype=bool)
    forbidden = ~fov | vessel_mask | (dd <= disc_r + 4)
    lesions = 0
    label = params.class_label
    lo_c = params.lesion_contrast

    def stamp(blobs, tint, sign, union_offsets=None):
        nonlocal rgb, lesion_mask, lesions
        for x, y, r in blobs:
            amp = lo_c * rng.uniform(1.1, 1.5)
            d = np.hypot(xx - x, yy - y)
            core = d <= r
            if union_offsets is not None:
                for _ in range(int(rng.integers(1, 3))):
                    ox, oy = rng.uniform(-0.5, 0.5, size=2) * r
                    r2 = r * rng.uniform(0.6, 0.9)
                    d2 = np.hypot(xx - x - ox, yy - y - oy)
                    core |= d2 <= r2
                    d = np.minimum(d, d2 + (r - r2))
            skirt = np.where(core, 1.0, np.exp(-np.maximum(d - r, 0.0) ** 2 / 2.0))
            rgb = rgb + sign * amp * tint[None, None, :] * skirt[:, :, None]
            lesion_mask |= core
            lesions += 1

    if label == ClassLabel.DRUSEN:
        k = int(rng.integers(params.drusen_count[0], params.drusen_count[1] + 1))
        blobs = _place_blobs(rng, k, params.drusen_radius, centre, radius, forbidden, [], size)
        stamp(blobs, DRUSEN_TINT, +1.0)
    elif label == ClassLabel.DIABETIC_RETINOPATHY:
        k = int(rng.integers(params.dot_count[0], params.dot_count[1] + 1))
        dots = _place_blobs(rng, k, params.dot_radius, centre, radius, forbidden, [], size)
        m = int(rng.integers(params.patch_count[0], params.patch_count[1] + 1))
        # patch cores may extend ~r/2 past the nominal radius
        patches = _place_blobs(rng, m, (params.patch_radius[0] * 1.5, params.patch_radius[1] * 1.5),
                               centre, radius, forbidden, dots, size)
        patches = [(x, y, r / 1.5) for x, y, r in patches]
        stamp(dots, DOT_TINT, -1.0)
        stamp(patches, DRUSEN_TINT, +1.0, union_offsets=True)

    if params.noise > 0:
        rgb = rgb + rng.normal(0.0, params.noise, size=rgb.shape)
    rgb[~fov] = 0.0
    img = np.clip(np.rint(rgb), 0, 255).astype(np.uint8)
    truth = GroundTruth(vessel_mask, lesion_mask & fov, label, lesions, fov)
    return img, truth
