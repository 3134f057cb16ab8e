"""Depth-based distance estimation for detected objects.

The cascade per detection: crop the depth map to the bounding box, blank
background pixels with the refined class mask, substitute NaN for invalid
zeros, min-pool 3x3 to shed background bleed, keep values within two
standard deviations of the crop population, average-pool with grouped
kernels (2, 3, 5), drop NaNs, and take the global mean.

Numeric contract: pooling windows and the global mean are computed so that
a window of equal values yields exactly that value (no rounding drift), and
non-NaN values are accumulated in row-major order. A constant-depth object
therefore estimates bit-exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidDetectionError
from .segmentation import RefinedSegMap
from .types import ClassRegistry, Detection


@dataclass
class DistanceEstimate:
    """Result of the cascade; ``meters`` is None when too few points survive."""

    detection_id: int
    meters: float | None
    inlier_count: int
    stage_trace: dict[str, int] = field(default_factory=dict)


def _pad_to_multiple(a: np.ndarray, kernel: int) -> tuple[np.ndarray, int, int]:
    h, w = a.shape
    rows = -(-h // kernel)
    cols = -(-w // kernel)
    padded = np.full((rows * kernel, cols * kernel), np.nan, dtype=np.float64)
    padded[:h, :w] = a
    return padded, rows, cols


def min_pool(a, kernel: int) -> np.ndarray:
    """Non-overlapping kernel x kernel minimum, stride = kernel.

    NaNs are ignored; an all-NaN window stays NaN. Border windows that fall
    off the frame use whatever pixels exist, and the output shape is
    ceil(H/kernel) x ceil(W/kernel).
    """
    if kernel < 1:
        raise ValueError(f"kernel must be >= 1, got {kernel}")
    a = np.asarray(a, dtype=np.float64)
    padded, rows, cols = _pad_to_multiple(a, kernel)
    out = np.full((rows, cols), np.nan)
    for di in range(kernel):
        for dj in range(kernel):
            out = np.fmin(out, padded[di::kernel, dj::kernel])
    return out


def average_pool(a, kernel: int) -> np.ndarray:
    """NaN-aware mean with the same windowing as min_pool.

    A window whose non-NaN values are all equal returns that value exactly;
    otherwise values are summed in row-major window order and divided by
    the count.
    """
    if kernel < 1:
        raise ValueError(f"kernel must be >= 1, got {kernel}")
    a = np.asarray(a, dtype=np.float64)
    padded, rows, cols = _pad_to_multiple(a, kernel)
    acc = np.zeros((rows, cols))
    cnt = np.zeros((rows, cols), dtype=np.int64)
    vmin = np.full((rows, cols), np.nan)
    vmax = np.full((rows, cols), np.nan)
    for di in range(kernel):
        for dj in range(kernel):
            v = padded[di::kernel, dj::kernel]
            ok = ~np.isnan(v)
            acc += np.where(ok, v, 0.0)
            cnt += ok
            vmin = np.fmin(vmin, v)
            vmax = np.fmax(vmax, v)
    out = np.where(vmin == vmax, vmin, acc / np.maximum(cnt, 1))
    out[cnt == 0] = np.nan
    return out


def _population_stats(values: np.ndarray) -> tuple[float, float]:
    """Mean and population standard deviation, exact for constant data."""
    vmin = float(values.min())
    vmax = float(values.max())
    if vmin == vmax:
        return vmin, 0.0
    mu = float(values.mean())
    sigma = float(np.sqrt(np.mean((values - mu) ** 2)))
    return mu, sigma


def gaussian_inliers(a, sigma_multiplier: float = 2.0) -> np.ndarray:
    """NaN out values beyond mean +- sigma_multiplier * population std.

    Interval bounds are inclusive, so a zero-spread population keeps all of
    its points. An all-NaN input comes back unchanged, which downstream
    stages read as "no estimate".
    """
    a = np.asarray(a, dtype=np.float64)
    valid = ~np.isnan(a)
    values = a[valid]
    out = a.copy()
    if values.size == 0:
        return out
    mu, sigma = _population_stats(values)
    lo = mu - sigma_multiplier * sigma
    hi = mu + sigma_multiplier * sigma
    out[valid & ((a < lo) | (a > hi))] = np.nan
    return out


def grouped_average_pool(a, kernels=(2, 3, 5)) -> np.ndarray:
    """Average-pool per kernel, flatten row-major, concatenate, drop NaNs."""
    if not kernels:
        raise ValueError("kernels must be non-empty")
    a = np.asarray(a, dtype=np.float64)
    parts = [average_pool(a, int(k)).ravel() for k in kernels]
    flat = np.concatenate(parts)
    return flat[~np.isnan(flat)]


def exact_mean(values: np.ndarray) -> float:
    """Row-major sequential mean, exact when all values are equal."""
    values = np.asarray(values, dtype=np.float64)
    vmin = float(values.min())
    vmax = float(values.max())
    if vmin == vmax:
        return vmin
    total = 0.0
    for chunk in np.nditer(values):
        total += float(chunk)
    return total / values.size


def crop_and_mask(
    depth: np.ndarray,
    refined: RefinedSegMap,
    det: Detection,
    registry: ClassRegistry,
) -> tuple[np.ndarray, bool]:
    """Bounding-box depth crop with background blanked out.

    Pixels where the detection class's refined mask is 0 become NaN, as do
    invalid zero depths. A class with no refined segmentation counterpart
    falls back to the unmasked crop; the second return value tells whether
    the mask was applied.
    """
    depth = np.asarray(depth)
    height, width = depth.shape
    x, y, w, h = det.bbox
    if w <= 0 or h <= 0:
        raise InvalidDetectionError(
            f"detection {det.detection_id}: bbox has non-positive size {det.bbox}"
        )
    x0 = max(0, int(np.floor(x)))
    y0 = max(0, int(np.floor(y)))
    x1 = min(width, int(np.ceil(x + w)))
    y1 = min(height, int(np.ceil(y + h)))
    if x0 >= x1 or y0 >= y1:
        raise InvalidDetectionError(
            f"detection {det.detection_id}: bbox {det.bbox} lies outside the "
            f"{width}x{height} frame"
        )
    crop = depth[y0:y1, x0:x1].astype(np.float64)
    class_id = registry.id_of(det.class_label)
    mask = refined.class_mask(class_id)
    mask_applied = mask is not None
    if mask_applied:
        crop[mask[y0:y1, x0:x1] == 0] = np.nan
    crop[crop == 0] = np.nan
    return crop, mask_applied


def estimate_distance(
    depth: np.ndarray,
    refined: RefinedSegMap,
    det: Detection,
    cfg,
    registry: ClassRegistry,
) -> DistanceEstimate:
    """Run the full cascade for one detection.

    Raises InvalidDetectionError for a bbox outside the frame; a crop that
    keeps fewer than cfg.min_points values yields meters=None.
    """
    crop, mask_applied = crop_and_mask(depth, refined, det, registry)
    trace = {"mask_applied": int(mask_applied)}
    if cfg.depth_scale != 1.0:
        crop = crop * cfg.depth_scale
    trace["crop_valid"] = int(np.count_nonzero(~np.isnan(crop)))
    pooled = min_pool(crop, cfg.min_pool_kernel)
    trace["min_pooled"] = int(np.count_nonzero(~np.isnan(pooled)))
    inliers = gaussian_inliers(pooled, cfg.sigma_multiplier)
    trace["inliers"] = int(np.count_nonzero(~np.isnan(inliers)))
    values = grouped_average_pool(inliers, cfg.avg_pool_kernels)
    trace["pooled_values"] = len(values)
    if len(values) < cfg.min_points:
        return DistanceEstimate(det.detection_id, None, len(values), trace)
    return DistanceEstimate(det.detection_id, exact_mean(values), len(values), trace)
