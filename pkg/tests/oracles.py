"""Independent brute-force oracles used to check the library.

Everything here evaluates the defining statement of each operation as
directly as possible (per-pixel loops, breadth-first floods, exhaustive
half-plane tests), sharing no code with the implementations under test.
"""

from collections import deque

import numpy as np


def brute_erode(mask: np.ndarray, offsets) -> np.ndarray:
    m = np.asarray(mask).astype(bool)
    h, w = m.shape
    out = np.zeros((h, w), dtype=np.uint8)
    for y in range(h):
        for x in range(w):
            ok = True
            for dx, dy in offsets:
                yy, xx = y + dy, x + dx
                if not (0 <= yy < h and 0 <= xx < w and m[yy, xx]):
                    ok = False
                    break
            out[y, x] = 1 if ok else 0
    return out


def brute_dilate(mask: np.ndarray, offsets) -> np.ndarray:
    m = np.asarray(mask).astype(bool)
    h, w = m.shape
    out = np.zeros((h, w), dtype=np.uint8)
    for y in range(h):
        for x in range(w):
            for dx, dy in offsets:
                yy, xx = y + dy, x + dx
                if 0 <= yy < h and 0 <= xx < w and m[yy, xx]:
                    out[y, x] = 1
                    break
    return out


def batch_erode(masks: np.ndarray, offsets) -> np.ndarray:
    """Gather-then-reduce evaluation of erosion over a batch of masks."""
    b, h, w = masks.shape
    pad = max(max(abs(dx), abs(dy)) for dx, dy in offsets)
    padded = np.zeros((b, h + 2 * pad, w + 2 * pad), dtype=bool)
    padded[:, pad : pad + h, pad : pad + w] = masks.astype(bool)
    ys, xs = np.mgrid[0:h, 0:w]
    stack = [padded[:, ys + pad + dy, xs + pad + dx] for dx, dy in offsets]
    return np.all(np.stack(stack), axis=0).astype(np.uint8)


def batch_dilate(masks: np.ndarray, offsets) -> np.ndarray:
    b, h, w = masks.shape
    pad = max(max(abs(dx), abs(dy)) for dx, dy in offsets)
    padded = np.zeros((b, h + 2 * pad, w + 2 * pad), dtype=bool)
    padded[:, pad : pad + h, pad : pad + w] = masks.astype(bool)
    ys, xs = np.mgrid[0:h, 0:w]
    stack = [padded[:, ys + pad + dy, xs + pad + dx] for dx, dy in offsets]
    return np.any(np.stack(stack), axis=0).astype(np.uint8)


def brute_fill_holes(mask: np.ndarray) -> np.ndarray:
    """Flood the background 4-connected from the border; the rest turns on."""
    m = np.asarray(mask).astype(bool)
    h, w = m.shape
    open_bg = np.zeros((h, w), dtype=bool)
    queue = deque()
    for x in range(w):
        for y in (0, h - 1):
            if not m[y, x] and not open_bg[y, x]:
                open_bg[y, x] = True
                queue.append((y, x))
    for y in range(h):
        for x in (0, w - 1):
            if not m[y, x] and not open_bg[y, x]:
                open_bg[y, x] = True
                queue.append((y, x))
    while queue:
        y, x = queue.popleft()
        for dy, dx in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            yy, xx = y + dy, x + dx
            if 0 <= yy < h and 0 <= xx < w and not m[yy, xx] and not open_bg[yy, xx]:
                open_bg[yy, xx] = True
                queue.append((yy, xx))
    return (m | (~m & ~open_bg)).astype(np.uint8)


def brute_components(mask: np.ndarray) -> list[set]:
    """8-connected components as sets of (y, x), by breadth-first flood."""
    m = np.asarray(mask).astype(bool)
    h, w = m.shape
    seen = np.zeros((h, w), dtype=bool)
    comps = []
    for y in range(h):
        for x in range(w):
            if m[y, x] and not seen[y, x]:
                comp = set()
                queue = deque([(y, x)])
                seen[y, x] = True
                while queue:
                    cy, cx = queue.popleft()
                    comp.add((cy, cx))
                    for dy in (-1, 0, 1):
                        for dx in (-1, 0, 1):
                            yy, xx = cy + dy, cx + dx
                            if (
                                0 <= yy < h
                                and 0 <= xx < w
                                and m[yy, xx]
                                and not seen[yy, xx]
                            ):
                                seen[yy, xx] = True
                                queue.append((yy, xx))
                comps.append(comp)
    return comps


def brute_hull(points) -> np.ndarray:
    """O(n^3) pairwise half-plane hull; vertices in CCW cyclic order.

    An ordered pair (i, j) is a hull edge when every other point sits on or
    left of the directed line i -> j, and every point exactly on the line
    projects inside the segment (so only extreme vertices survive).
    """
    pts = np.unique(np.asarray(points, dtype=np.int64).reshape(-1, 2), axis=0)
    n = len(pts)
    if n == 1:
        return pts
    x = pts[:, 0]
    y = pts[:, 1]
    dx = x[None, :] - x[:, None]
    dy = y[None, :] - y[:, None]
    length2 = dx * dx + dy * dy
    edge_ok = np.zeros((n, n), dtype=bool)
    for i in range(n):
        vx = x[None, :] - x[i]
        vy = y[None, :] - y[i]
        cross = dx[i][:, None] * vy - dy[i][:, None] * vx  # (j, k)
        dot = dx[i][:, None] * vx + dy[i][:, None] * vy
        side = (cross >= 0).all(axis=1)
        on_line = cross == 0
        within = (dot >= 0) & (dot <= length2[i][:, None])
        col_ok = (~on_line | within).all(axis=1)
        edge_ok[i] = side & col_ok & (length2[i] > 0)
    if not edge_ok.any():
        return pts[[0]]
    succ = {}
    for i in range(n):
        js = np.nonzero(edge_ok[i])[0]
        if len(js):
            succ[i] = int(js[0])
    start = min(succ)
    order = [start]
    cur = succ[start]
    while cur != start:
        order.append(cur)
        cur = succ[cur]
    return pts[order]


def point_in_hull(hull: np.ndarray, px: int, py: int) -> bool:
    """Inside-or-on test by signed areas against every edge."""
    h = np.asarray(hull, dtype=np.int64)
    if len(h) == 1:
        return bool(h[0, 0] == px and h[0, 1] == py)
    if len(h) == 2:
        (x0, y0), (x1, y1) = h
        cross = (x1 - x0) * (py - y0) - (y1 - y0) * (px - x0)
        if cross != 0:
            return False
        return min(x0, x1) <= px <= max(x0, x1) and min(y0, y1) <= py <= max(y0, y1)
    for i in range(len(h)):
        x0, y0 = h[i]
        x1, y1 = h[(i + 1) % len(h)]
        if (x1 - x0) * (py - y0) - (y1 - y0) * (px - x0) < 0:
            return False
    return True


def _window_mean(values) -> float:
    """Mean of a window's non-NaN values; exact when they are all equal."""
    vals = [v for v in values if not np.isnan(v)]
    if not vals:
        return float("nan")
    if min(vals) == max(vals):
        return vals[0]
    total = 0.0
    for v in vals:
        total += v
    return total / len(vals)


def brute_min_pool(grid: np.ndarray, kernel: int) -> np.ndarray:
    g = np.asarray(grid, dtype=np.float64)
    h, w = g.shape
    rows = -(-h // kernel)
    cols = -(-w // kernel)
    out = np.full((rows, cols), np.nan)
    for s in range(rows):
        for p in range(cols):
            best = np.nan
            for i in range(kernel):
                for j in range(kernel):
                    yy, xx = kernel * s + i, kernel * p + j
                    if yy < h and xx < w and not np.isnan(g[yy, xx]):
                        if np.isnan(best) or g[yy, xx] < best:
                            best = g[yy, xx]
            out[s, p] = best
    return out


def brute_average_pool(grid: np.ndarray, kernel: int) -> np.ndarray:
    g = np.asarray(grid, dtype=np.float64)
    h, w = g.shape
    rows = -(-h // kernel)
    cols = -(-w // kernel)
    out = np.full((rows, cols), np.nan)
    for s in range(rows):
        for p in range(cols):
            window = []
            for i in range(kernel):
                for j in range(kernel):
                    yy, xx = kernel * s + i, kernel * p + j
                    if yy < h and xx < w:
                        window.append(g[yy, xx])
            out[s, p] = _window_mean(window)
    return out


def brute_grouped_average(grid: np.ndarray, kernels) -> list[float]:
    values = []
    for k in kernels:
        pooled = brute_average_pool(grid, k)
        for v in pooled.ravel():
            if not np.isnan(v):
                values.append(float(v))
    return values


def brute_inlier_mask(values: np.ndarray, k: float = 2.0) -> np.ndarray:
    """Boolean keep-mask per the two-sigma population interval."""
    vals = np.asarray(values, dtype=np.float64)
    finite = [v for v in vals.ravel() if not np.isnan(v)]
    if not finite:
        return ~np.isnan(vals)
    if min(finite) == max(finite):
        mu, sigma = finite[0], 0.0
    else:
        mu = sum(finite) / len(finite)
        sigma = (sum((v - mu) ** 2 for v in finite) / len(finite)) ** 0.5
    lo, hi = mu - k * sigma, mu + k * sigma
    keep = np.zeros(vals.shape, dtype=bool)
    it = np.nditer(vals, flags=["multi_index"])
    for v in it:
        val = float(v)
        if not np.isnan(val) and lo <= val <= hi:
            keep[it.multi_index] = True
    return keep
