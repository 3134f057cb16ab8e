"""Dynamic road region of interest and lane filtering.

The ROI is rebuilt per frame from the road segmentation: collect road
pixels, take their convex hull to bridge gaps left by objects on the road,
rasterize it, then open (erode + dilate) with a disc to cancel mask noise
while keeping soft margins. Lane point instances are then restricted to
the ROI so off-road line detections disappear.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hull import convex_hull, mask_extreme_points, rasterize_hull
from .morphology import StructuringElement, dilate, erode
from .types import LaneInstance


@dataclass
class RoiMask:
    mask: np.ndarray  # (H, W) uint8
    source_frame: int = 0
    degenerate: bool = False


def build_dynamic_roi(
    seg: np.ndarray,
    road_class_id: int,
    se: StructuringElement,
    frame_index: int = 0,
) -> RoiMask:
    """Convex, opened road region from a segmentation map.

    Fewer than three non-collinear road pixels marks the result degenerate;
    the fallback is the raw road mask dilated once, which is empty when no
    road was segmented at all.
    """
    seg = np.asarray(seg)
    height, width = seg.shape
    road = (seg == road_class_id).astype(np.uint8)
    candidates = mask_extreme_points(road)
    if len(candidates) == 0:
        return RoiMask(np.zeros((height, width), dtype=np.uint8), frame_index, True)
    hull = convex_hull(candidates)
    if len(hull) < 3:
        return RoiMask(dilate(road, se), frame_index, True)
    raster = rasterize_hull(hull, width, height)
    opened = dilate(erode(raster, se), se)
    return RoiMask(opened, frame_index, False)


def filter_lanes(
    lanes: list[LaneInstance], roi: RoiMask, keep_fraction: float = 0.5
) -> list[LaneInstance]:
    """Keep in-ROI points; drop instances that lost too much of themselves.

    An instance survives when at least ``keep_fraction`` of its points lie
    on ROI pixels and at least two points remain (anything shorter is no
    longer a polyline). Point order is preserved.
    """
    mask = roi.mask
    height, width = mask.shape
    out = []
    for lane in lanes:
        pts = lane.points
        if len(pts) == 0:
            continue
        xs, ys = pts[:, 0], pts[:, 1]
        inb = (xs >= 0) & (xs < width) & (ys >= 0) & (ys < height)
        inside = np.zeros(len(pts), dtype=bool)
        inside[inb] = mask[ys[inb], xs[inb]] > 0
        kept = pts[inside]
        if len(kept) >= 2 and len(kept) / len(pts) >= keep_fraction:
            out.append(LaneInstance(lane.instance_id, kept))
    return out


def _x_at_rows(points: np.ndarray, rows: np.ndarray) -> np.ndarray:
    """Linear interpolation of a polyline's x position at integer rows.

    Rows outside the polyline's y-range come back NaN. Duplicate y values
    are collapsed to their mean x so interpolation stays well defined.
    """
    ys = points[:, 1].astype(np.float64)
    xs = points[:, 0].astype(np.float64)
    order = np.argsort(ys, kind="stable")
    ys, xs = ys[order], xs[order]
    uniq, inverse = np.unique(ys, return_inverse=True)
    if len(uniq) != len(ys):
        sums = np.zeros(len(uniq))
        counts = np.zeros(len(uniq))
        np.add.at(sums, inverse, xs)
        np.add.at(counts, inverse, 1.0)
        ys, xs = uniq, sums / counts
    out = np.interp(rows.astype(np.float64), ys, xs, left=np.nan, right=np.nan)
    return out


def lane_regions(lanes: list[LaneInstance], roi: RoiMask) -> list[np.ndarray]:
    """Masks of ROI pixels strictly between adjacent lane polylines.

    Lanes are ordered by mean x; each adjacent pair yields one region.
    Boundaries are exclusive so a line pixel belongs to no region, and rows
    outside either polyline's y-range are excluded. Fewer than two lanes
    means no lane area: an empty list.
    """
    if len(lanes) < 2:
        return []
    mask = roi.mask
    height, width = mask.shape
    ordered = sorted(lanes, key=lambda l: (float(l.points[:, 0].mean()), l.instance_id))
    rows = np.arange(height)
    cols = np.arange(width)
    bounds = [_x_at_rows(l.points, rows) for l in ordered]
    regions = []
    for left, right in zip(bounds[:-1], bounds[1:]):
        valid = ~np.isnan(left) & ~np.isnan(right)
        lo = np.where(valid, left, np.inf)[:, None]
        hi = np.where(valid, right, -np.inf)[:, None]
        region = (cols[None, :] > lo) & (cols[None, :] < hi) & (mask > 0)
        regions.append(region.astype(np.uint8))
    return regions
