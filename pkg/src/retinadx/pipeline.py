"""Per-image processing shared by the command line and library callers."""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import ndimage

from .classifier import Classification, ModelSet
from .config import PipelineConfig
from .errors import ConfigError
from .features import extract_features
from .image_core import check_color
from .preprocess import preprocess
from .vessel_seg import Segmentation, dbded, segment_details

OVERLAY_ALPHA = 0.5
VESSEL_RGB = np.array([0.0, 255.0, 0.0])
CANDIDATE_RGB = np.array([255.0, 255.0, 0.0])


@dataclass
class ImageResult:
    gray: np.ndarray
    texture: np.ndarray
    segmentation: Segmentation
    stats_region: np.ndarray
    edges: np.ndarray
    features: np.ndarray
    timings: dict[str, float] = field(default_factory=dict)
    classification: Classification | None = None

    @property
    def vessels(self) -> np.ndarray:
        return self.segmentation.vessels

    @property
    def lesion_candidates(self) -> np.ndarray:
        """Bright-structure edges from the directional detector, off the vessel tree."""
        near_vessel = ndimage.binary_dilation(self.vessels, iterations=2)
        return self.edges & self.stats_region & ~near_vessel


def process_image(img: np.ndarray, cfg: PipelineConfig, models: ModelSet | None = None) -> ImageResult:
    """Preprocess, segment, detect edges, extract features and optionally classify."""
    img = check_color(img)
    timings: dict[str, float] = {}

    t = time.perf_counter()
    gray = preprocess(img, cfg.preprocess)
    texture = preprocess(img, replace(cfg.preprocess, equalize=False))
    timings["preprocess"] = time.perf_counter() - t

    t = time.perf_counter()
    seg = segment_details(gray, cfg.segmentation)
    timings["segmentation"] = time.perf_counter() - t

    t = time.perf_counter()
    edges = dbded(gray, cfg.dbded)
    timings["edges"] = time.perf_counter() - t

    t = time.perf_counter()
    region = seg.fov
    if cfg.segmentation.fov_erosion and not region.all():
        region = ndimage.binary_erosion(region, iterations=cfg.segmentation.fov_erosion)
    features = extract_features(gray, seg.vessels, cfg.features, region, texture)
    timings["features"] = time.perf_counter() - t

    result = ImageResult(gray, texture, seg, region, edges, features, timings)
    if models is not None:
        if models.schema_id != cfg.features.schema_id:
            raise ConfigError(
                f"model expects feature schema {models.schema_id}, config gives {cfg.features.schema_id}")
        t = time.perf_counter()
        result.classification = models.classify(features)
        timings["classify"] = time.perf_counter() - t
    return result


def overlay(img: np.ndarray, vessels: np.ndarray, candidates: np.ndarray | None = None) -> np.ndarray:
    """Blend the vessel mask (green) and lesion candidates (yellow) over the image."""
    out = check_color(img).astype(np.float64)
    if candidates is not None:
        out[candidates] = (1 - OVERLAY_ALPHA) * out[candidates] + OVERLAY_ALPHA * CANDIDATE_RGB
    out[vessels] = (1 - OVERLAY_ALPHA) * out[vessels] + OVERLAY_ALPHA * VESSEL_RGB
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)
