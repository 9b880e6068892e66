"""Vascular structure maps and statistical texture descriptors."""

from .maps import (
    WindowSpec,
    boundary_pixels,
    luminance_map,
    vessel_density_map,
    vessel_orientation_map,
    vessel_thickness_map,
    window_sum,
)
from .texture import (
    TextureStats,
    central_moment,
    correlation_distance,
    entropy_parzen,
    histogram_entropy,
    silverman_bandwidth,
    texture_stats,
)
from .vector import FeatureSchema, build_feature_vector, compute_maps, extract_features
from .zernike import (
    ZernikeTable,
    radial_polynomial,
    valid_pairs,
    zernike_moment,
    zernike_moments,
    zernike_polynomial,
    zernike_reconstruct,
)

__all__ = [
    "FeatureSchema",
    "TextureStats",
    "WindowSpec",
    "ZernikeTable",
    "boundary_pixels",
    "build_feature_vector",
    "central_moment",
    "compute_maps",
    "correlation_distance",
    "entropy_parzen",
    "extract_features",
    "histogram_entropy",
    "luminance_map",
    "radial_polynomial",
    "silverman_bandwidth",
    "texture_stats",
    "valid_pairs",
    "vessel_density_map",
    "vessel_orientation_map",
    "vessel_thickness_map",
    "window_sum",
    "zernike_moment",
    "zernike_moments",
    "zernike_polynomial",
    "zernike_reconstruct",
]
