"""Segmentation map refinement: dilate, fill, drop specks, convexify.

Per class: extract the binary mask, dilate it, fill enclosed holes, drop
connected components smaller than a fraction of the frame, and replace
each survivor with its rasterized convex hull. The per-class refined masks
are exactly the unions of those hull rasters; the merged map resolves
overlaps by registry priority (smaller class id wins).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .hull import convex_hull, rasterize_hull
from .morphology import StructuringElement, _STRUCT_8, dilate, fill_holes
from .hull import mask_extreme_points


@dataclass
class RefinedSegMap:
    """Refined class map plus the per-class hulls and masks behind it."""

    class_ids: np.ndarray                      # (H, W) merged map
    hulls: dict[int, list[np.ndarray]] = field(default_factory=dict)
    masks: dict[int, np.ndarray] = field(default_factory=dict)

    def class_mask(self, class_id: int) -> np.ndarray | None:
        """Refined mask for a class, or None when the class was not refined."""
        return self.masks.get(int(class_id))


def refine_class(
    seg: np.ndarray,
    class_id: int,
    se: StructuringElement,
    min_area_frac: float,
) -> tuple[np.ndarray, list[np.ndarray]]:
    """Refined binary mask and hull list for one class.

    Component areas are measured after dilation and hole filling; the drop
    threshold is ``min_area_frac`` of the frame area. An absent class gives
    an empty mask and no hulls.
    """
    seg = np.asarray(seg)
    height, width = seg.shape
    refined = np.zeros((height, width), dtype=np.uint8)
    hulls: list[np.ndarray] = []
    raw = (seg == class_id)
    rows = np.nonzero(raw.any(axis=1))[0]
    if rows.size == 0:
        return refined, hulls
    # work inside the class bounding box plus the dilation reach; the 1-px
    # zero margin keeps window-border background equivalent to frame-border
    # background for hole filling
    cols = np.nonzero(raw.any(axis=0))[0]
    pad = se.radius + 1
    wy0 = max(0, int(rows[0]) - pad)
    wy1 = min(height, int(rows[-1]) + 1 + pad)
    wx0 = max(0, int(cols[0]) - pad)
    wx1 = min(width, int(cols[-1]) + 1 + pad)
    window = raw[wy0:wy1, wx0:wx1]
    grown = fill_holes(dilate(window, se))
    labels, n = ndimage.label(grown, structure=_STRUCT_8)
    if n == 0:
        return refined, hulls
    areas = np.bincount(labels.ravel(), minlength=n + 1)
    threshold = min_area_frac * width * height
    slices = ndimage.find_objects(labels)
    order = sorted(
        (k for k in range(1, n + 1) if areas[k] >= threshold),
        key=lambda k: (-int(areas[k]), slices[k - 1][0].start, slices[k - 1][1].start),
    )
    for k in order:
        sl = slices[k - 1]
        pts = mask_extreme_points(labels[sl] == k)
        pts[:, 0] += sl[1].start + wx0
        pts[:, 1] += sl[0].start + wy0
        hull = convex_hull(pts)
        hulls.append(hull)
        refined |= rasterize_hull(hull, width, height)
    return refined, hulls


def refine_all(
    seg: np.ndarray,
    class_ids: list[int],
    se: StructuringElement,
    min_area_frac: float,
) -> RefinedSegMap:
    """Refine each class and merge; earlier registry ids win overlaps.

    Classes not listed pass through untouched except where a refined mask
    covers them. Pixels a refined class no longer claims fall back to
    background.
    """
    seg = np.asarray(seg)
    ids = sorted(set(int(c) for c in class_ids))
    masks: dict[int, np.ndarray] = {}
    hulls: dict[int, list[np.ndarray]] = {}
    for cid in ids:
        masks[cid], hulls[cid] = refine_class(seg, cid, se, min_area_frac)
    merged = seg.copy()
    for cid in ids:
        merged[seg == cid] = 0
    # paint lowest-priority first so the earliest registry id lands on top
    for cid in reversed(ids):
        merged[masks[cid] > 0] = cid
    return RefinedSegMap(class_ids=merged, hulls=hulls, masks=masks)
