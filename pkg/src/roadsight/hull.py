"""2-D convex hulls on integer pixel coordinates, and exact rasterization.

All arithmetic is integer, so results are deterministic and boundary
decisions are exact. Hull vertex order is counter-clockwise with the axes
treated as standard Cartesian (on images, where y grows downward, that
order appears clockwise on screen).
"""

from __future__ import annotations

import numpy as np


def _cross(o, a, b) -> int:
    return int((a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]))


def convex_hull(points) -> np.ndarray:
    """Hull vertices (CCW) of a set of integer points, monotone-chain.

    Every returned vertex is an input point and no three returned vertices
    are collinear. Degenerate inputs are not an error: a single distinct
    point returns shape (1, 2) and a collinear set returns its two extreme
    endpoints, shape (2, 2). Callers detect degeneracy by ``len(hull) < 3``.
    """
    pts = np.asarray(points, dtype=np.int64).reshape(-1, 2)
    if len(pts) == 0:
        raise ValueError("convex_hull requires at least one point")
    pts = np.unique(pts, axis=0)  # lexicographic sort on (x, y)
    if len(pts) == 1:
        return pts

    def build(chain_pts):
        chain: list[np.ndarray] = []
        for p in chain_pts:
            while len(chain) >= 2 and _cross(chain[-2], chain[-1], p) <= 0:
                chain.pop()
            chain.append(p)
        return chain

    lower = build(pts)
    upper = build(pts[::-1])
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 2:  # fully collinear set collapses to the two extremes
        hull = [pts[0], pts[-1]]
    return np.array(hull, dtype=np.int64)


def hull_contains(hull: np.ndarray, x: int, y: int) -> bool:
    """Membership test (boundary inclusive) against a CCW hull polygon."""
    h = np.asarray(hull, dtype=np.int64)
    if len(h) == 1:
        return bool(h[0, 0] == x and h[0, 1] == y)
    if len(h) == 2:
        a, b = h
        if _cross(a, b, (x, y)) != 0:
            return False
        return (
            min(a[0], b[0]) <= x <= max(a[0], b[0])
            and min(a[1], b[1]) <= y <= max(a[1], b[1])
        )
    for i in range(len(h)):
        if _cross(h[i], h[(i + 1) % len(h)], (x, y)) < 0:
            return False
    return True


def _draw_segment(mask: np.ndarray, a, b) -> None:
    """Bresenham line between integer endpoints, clipped to the mask."""
    h, w = mask.shape
    x0, y0 = int(a[0]), int(a[1])
    x1, y1 = int(b[0]), int(b[1])
    dx, dy = abs(x1 - x0), -abs(y1 - y0)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    err = dx + dy
    while True:
        if 0 <= y0 < h and 0 <= x0 < w:
            mask[y0, x0] = 1
        if x0 == x1 and y0 == y1:
            break
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x0 += sx
        if e2 <= dx:
            err += dx
            y0 += sy


def rasterize_hull(hull, width: int, height: int) -> np.ndarray:
    """Binary mask of pixels whose centre lies inside or on the hull.

    Scanline fill with exact integer half-plane bounds per row, so the
    result matches the per-pixel inside-or-on-boundary definition exactly.
    Degenerate hulls rasterize to the point / the Bresenham segment.
    """
    h = np.asarray(hull, dtype=np.int64).reshape(-1, 2)
    out = np.zeros((height, width), dtype=np.uint8)
    if len(h) == 1:
        x, y = int(h[0, 0]), int(h[0, 1])
        if 0 <= y < height and 0 <= x < width:
            out[y, x] = 1
        return out
    if len(h) == 2:
        _draw_segment(out, h[0], h[1])
        return out

    y_lo = max(0, int(h[:, 1].min()))
    y_hi = min(height - 1, int(h[:, 1].max()))
    if y_lo > y_hi:
        return out
    ys = np.arange(y_lo, y_hi + 1, dtype=np.int64)
    xmin = np.zeros(len(ys), dtype=np.int64)
    xmax = np.full(len(ys), width - 1, dtype=np.int64)
    feasible = np.ones(len(ys), dtype=bool)
    for i in range(len(h)):
        x0, y0 = int(h[i, 0]), int(h[i, 1])
        x1, y1 = int(h[(i + 1) % len(h), 0]), int(h[(i + 1) % len(h), 1])
        # inside-or-on means cross((dx,dy),(x-x0,y-y0)) >= 0, linear in x:
        # a*x + c >= 0 with a = -(y1-y0), c = (x1-x0)*(y-y0) + (y1-y0)*x0
        a = -(y1 - y0)
        c = (x1 - x0) * (ys - y0) + (y1 - y0) * x0
        if a == 0:
            feasible &= c >= 0
        elif a > 0:
            np.maximum(xmin, -(c // a), out=xmin)  # ceil((-c)/a) for a > 0
        else:
            np.minimum(xmax, (-c) // a, out=xmax)  # floor((-c)/a) for a < 0
    ok = feasible & (xmin <= xmax)
    cols = np.arange(width, dtype=np.int64)
    band = ok[:, None] & (cols[None, :] >= xmin[:, None]) & (cols[None, :] <= xmax[:, None])
    out[y_lo : y_hi + 1] = band
    return out


def mask_extreme_points(mask) -> np.ndarray:
    """Per-row leftmost/rightmost 1-pixels of a mask, as (x, y) points.

    The convex hull of these candidates equals the hull of all 1-pixels,
    which keeps hull building cheap on large masks.
    """
    m = np.asarray(mask).astype(bool, copy=False)
    rows = np.nonzero(m.any(axis=1))[0]
    if rows.size == 0:
        return np.empty((0, 2), dtype=np.int64)
    first = m[rows].argmax(axis=1)
    last = m.shape[1] - 1 - m[rows, ::-1].argmax(axis=1)
    pts = np.concatenate(
        [np.stack([first, rows], axis=1), np.stack([last, rows], axis=1)]
    )
    return np.unique(pts, axis=0).astype(np.int64)
