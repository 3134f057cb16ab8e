"""Binary mask primitives on the integer pixel grid.

Masks are 2-D numpy arrays indexed ``[y, x]`` with values in {0, 1}.
Pixels outside the frame count as 0 for every operation here, and all
functions are pure: inputs are never mutated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

# 8-connected foreground with 4-connected background: the dual pair that
# keeps components and the holes between them consistent.
_STRUCT_8 = np.ones((3, 3), dtype=bool)
_STRUCT_4 = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)

# Moore neighbourhood in clockwise order starting from "west", as (dy, dx).
_MOORE = ((0, -1), (-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1))


@dataclass(frozen=True)
class StructuringElement:
    """Probe shape for erosion and dilation.

    ``offsets`` are integer (dx, dy) displacements. Discs are symmetric about
    the origin and always contain (0, 0), so the reflected element equals the
    element itself.
    """

    radius: int
    offsets: tuple[tuple[int, int], ...]

    @classmethod
    def disc(cls, radius: int) -> "StructuringElement":
        """Closed disc: all integer (dx, dy) with dx**2 + dy**2 <= radius**2.

        Radius 0 yields the identity element {(0, 0)}; production code uses
        radius >= 1.
        """
        if radius < 0:
            raise ValueError(f"disc radius must be >= 0, got {radius}")
        r2 = radius * radius
        offs = tuple(
            (dx, dy)
            for dy in range(-radius, radius + 1)
            for dx in range(-radius, radius + 1)
            if dx * dx + dy * dy <= r2
        )
        return cls(radius=radius, offsets=offs)

    @classmethod
    def from_offsets(cls, offsets) -> "StructuringElement":
        offs = tuple((int(dx), int(dy)) for dx, dy in offsets)
        radius = max((max(abs(dx), abs(dy)) for dx, dy in offs), default=0)
        return cls(radius=radius, offsets=offs)

    def compose(self, other: "StructuringElement") -> "StructuringElement":
        """Minkowski sum of two elements (offset-wise sums, deduplicated)."""
        sums = {(a + c, b + d) for a, b in self.offsets for c, d in other.offsets}
        return StructuringElement.from_offsets(sorted(sums))


def _as_bool(mask) -> np.ndarray:
    m = np.asarray(mask)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ValueError(f"mask must be a non-empty 2-D array, got shape {m.shape}")
    return m.astype(bool, copy=False)


def erode(mask, se: StructuringElement) -> np.ndarray:
    """Pixel z survives iff every se offset translated to z lands on a 1."""
    m = _as_bool(mask)
    h, w = m.shape
    r = se.radius
    padded = np.zeros((h + 2 * r, w + 2 * r), dtype=bool)
    padded[r : r + h, r : r + w] = m
    out = np.ones((h, w), dtype=bool)
    for dx, dy in se.offsets:
        out &= padded[r + dy : r + dy + h, r + dx : r + dx + w]
    return out.astype(np.uint8)


def dilate(mask, se: StructuringElement) -> np.ndarray:
    """Pixel z turns on iff some se offset translated to z lands on a 1.

    Disc elements are symmetric, so no reflection step is needed.
    """
    m = _as_bool(mask)
    h, w = m.shape
    r = se.radius
    padded = np.zeros((h + 2 * r, w + 2 * r), dtype=bool)
    padded[r : r + h, r : r + w] = m
    out = np.zeros((h, w), dtype=bool)
    for dx, dy in se.offsets:
        out |= padded[r + dy : r + dy + h, r + dx : r + dx + w]
    return out.astype(np.uint8)


def opening(mask, se: StructuringElement) -> np.ndarray:
    """Erosion followed by dilation with the same element."""
    return dilate(erode(mask, se), se)


def fill_holes(mask) -> np.ndarray:
    """Turn on every 0-region not 4-connected to the frame border."""
    m = _as_bool(mask)
    bg = ~m
    labels, n = ndimage.label(bg, structure=_STRUCT_4)
    if n == 0:
        return m.astype(np.uint8)
    border_labels = np.unique(
        np.concatenate([labels[0], labels[-1], labels[:, 0], labels[:, -1]])
    )
    open_to_border = np.zeros(n + 1, dtype=bool)
    open_to_border[border_labels[border_labels > 0]] = True
    holes = bg & ~open_to_border[labels]
    return (m | holes).astype(np.uint8)


@dataclass
class Contour:
    """One connected component: traced boundary, pixel area, class id."""

    boundary: np.ndarray  # (N, 2) int array of (x, y) boundary points
    area: int
    class_id: int = 0


def label_mask(mask) -> tuple[np.ndarray, int]:
    """8-connected component labels (0 = background) and the label count."""
    m = _as_bool(mask)
    labels, n = ndimage.label(m, structure=_STRUCT_8)
    return labels, n


# For a move in direction k, the clockwise scan that found it last examined
# the background neighbour at direction (k+7)%8; this table gives that
# pixel's direction index as seen from the new position.
_BACKTRACK = tuple(
    _MOORE.index(
        (
            _MOORE[(k + 7) % 8][0] - _MOORE[k][0],
            _MOORE[(k + 7) % 8][1] - _MOORE[k][1],
        )
    )
    for k in range(8)
)


def _trace_boundary(labels: np.ndarray, lab: int, start: tuple[int, int]) -> np.ndarray:
    """Moore-neighbour boundary trace of one labelled component.

    ``start`` must be the component's first pixel in row-major order, which
    guarantees its west neighbour is background. Stops when the start pixel
    is about to be left in the same direction as the first move (Jacob's
    stopping criterion).
    """
    h, w = labels.shape

    def is_fg(y, x):
        return 0 <= y < h and 0 <= x < w and labels[y, x] == lab

    sy, sx = start
    boundary = [(sx, sy)]
    back = 0  # west neighbour of the row-major first pixel is background
    cy, cx = sy, sx
    first_move = None
    while True:
        found = None
        for step in range(1, 9):
            k = (back + step) % 8
            dy, dx = _MOORE[k]
            if is_fg(cy + dy, cx + dx):
                found = k
                break
        if found is None:
            break  # isolated single pixel
        if (cy, cx) == (sy, sx):
            if first_move is not None and found == first_move:
                break
            if first_move is None:
                first_move = found
        back = _BACKTRACK[found]
        cy, cx = cy + _MOORE[found][0], cx + _MOORE[found][1]
        boundary.append((cx, cy))
    if len(boundary) > 1 and boundary[-1] == boundary[0]:
        boundary.pop()
    return np.array(boundary, dtype=np.int64).reshape(-1, 2)


def connected_components(mask) -> list[Contour]:
    """8-connected components with traced boundaries and exact pixel areas.

    Sorted by area descending; ties broken by the row-major position of the
    component's first pixel so the order is deterministic.
    """
    labels, n = label_mask(mask)
    if n == 0:
        return []
    areas = np.bincount(labels.ravel(), minlength=n + 1)
    flat_first = np.full(n + 1, np.iinfo(np.int64).max, dtype=np.int64)
    ys, xs = np.nonzero(labels)
    flat = ys * labels.shape[1] + xs
    np.minimum.at(flat_first, labels[ys, xs], flat)
    order = sorted(range(1, n + 1), key=lambda k: (-int(areas[k]), int(flat_first[k])))
    out = []
    for lab in order:
        f = int(flat_first[lab])
        start = (f // labels.shape[1], f % labels.shape[1])
        boundary = _trace_boundary(labels, lab, start)
        out.append(Contour(boundary=boundary, area=int(areas[lab])))
    return out
