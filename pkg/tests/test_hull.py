import numpy as np
import pytest

from roadsight.hull import convex_hull, hull_contains, mask_extreme_points, rasterize_hull

from oracles import brute_hull, point_in_hull


def cyclic_equal(a: np.ndarray, b: np.ndarray) -> bool:
    if len(a) != len(b):
        return False
    if len(a) == 0:
        return True
    bl = b.tolist()
    al = a.tolist()
    if al[0] not in bl:
        return False
    k = bl.index(al[0])
    return al == bl[k:] + bl[:k]


class TestConvexHull:
    def test_square_corners_with_interior_point(self):
        pts = [(0, 0), (4, 0), (4, 4), (0, 4), (2, 2)]
        hull = convex_hull(pts)
        assert sorted(map(tuple, hull.tolist())) == [(0, 0), (0, 4), (4, 0), (4, 4)]

    def test_triangle_is_its_own_hull(self):
        pts = [(0, 0), (5, 1), (2, 6)]
        hull = convex_hull(pts)
        assert sorted(map(tuple, hull.tolist())) == sorted(pts)

    def test_single_point_degenerate(self):
        hull = convex_hull([(3, 7)])
        assert hull.tolist() == [[3, 7]]
        assert len(hull) < 3

    def test_collinear_returns_extreme_endpoints(self):
        hull = convex_hull([(0, 0), (1, 1), (2, 2), (3, 3)])
        assert len(hull) == 2
        assert sorted(map(tuple, hull.tolist())) == [(0, 0), (3, 3)]

    def test_duplicates_collapse(self):
        hull = convex_hull([(1, 1), (1, 1), (1, 1)])
        assert hull.tolist() == [[1, 1]]

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            convex_hull(np.empty((0, 2)))

    def test_matches_halfplane_oracle_on_random_grids(self):
        rng = np.random.default_rng(5)
        for trial in range(120):
            n = int(rng.integers(1, 60))
            pts = rng.integers(0, 64, size=(n, 2))
            hull = convex_hull(pts)
            oracle = brute_hull(pts)
            assert cyclic_equal(hull, oracle), f"trial {trial}"

    def test_output_is_convex_and_contains_inputs(self):
        rng = np.random.default_rng(6)
        for _ in range(60):
            pts = rng.integers(0, 100, size=(int(rng.integers(3, 80)), 2))
            hull = convex_hull(pts)
            if len(hull) >= 3:
                # uniform strict turn direction at every vertex
                for i in range(len(hull)):
                    o = hull[i]
                    a = hull[(i + 1) % len(hull)]
                    b = hull[(i + 2) % len(hull)]
                    cross = (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
                    assert cross > 0
            for x, y in pts:
                assert hull_contains(hull, int(x), int(y))

    def test_hull_vertices_are_input_points(self):
        rng = np.random.default_rng(7)
        for _ in range(30):
            pts = rng.integers(0, 50, size=(25, 2))
            hull = convex_hull(pts)
            seen = {tuple(p) for p in pts.tolist()}
            for v in hull.tolist():
                assert tuple(v) in seen


class TestRasterizeHull:
    def test_axis_aligned_rectangle(self):
        hull = convex_hull([(2, 2), (10, 2), (10, 8), (2, 8)])
        mask = rasterize_hull(hull, 16, 16)
        expected = np.zeros((16, 16), np.uint8)
        expected[2:9, 2:11] = 1
        assert np.array_equal(mask, expected)

    def test_single_point(self):
        mask = rasterize_hull(np.array([[5, 6]]), 10, 10)
        assert mask.sum() == 1 and mask[6, 5] == 1

    def test_point_outside_frame(self):
        assert rasterize_hull(np.array([[50, 50]]), 10, 10).sum() == 0

    def test_segment_degenerate(self):
        mask = rasterize_hull(np.array([[1, 1], [5, 5]]), 8, 8)
        for k in range(1, 6):
            assert mask[k, k] == 1

    def test_triangle_area_close_to_shoelace(self):
        tri = convex_hull([(3, 2), (28, 7), (10, 25)])
        mask = rasterize_hull(tri, 32, 32)
        x = tri[:, 0]
        y = tri[:, 1]
        shoelace = 0.5 * abs(
            float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))
        )
        perimeter = sum(
            float(np.hypot(*(tri[(i + 1) % 3] - tri[i]))) for i in range(3)
        )
        assert abs(int(mask.sum()) - shoelace) <= perimeter

    def test_matches_point_in_polygon_oracle(self):
        rng = np.random.default_rng(8)
        checked = 0
        while checked < 60:
            pts = rng.integers(-4, 36, size=(int(rng.integers(3, 10)), 2))
            hull = convex_hull(pts)
            if len(hull) < 3:
                continue  # degenerate hulls rasterize as Bresenham, not membership
            checked += 1
            mask = rasterize_hull(hull, 32, 32)
            for y in range(32):
                for x in range(32):
                    assert mask[y, x] == point_in_hull(hull, x, y)

    def test_degenerate_segment_is_a_connected_walk(self):
        rng = np.random.default_rng(12)
        for _ in range(20):
            a = rng.integers(0, 20, size=2)
            b = np.minimum(a + rng.integers(1, 12, size=2) * rng.integers(0, 2, size=2), 47)
            if (a == b).all():
                b = a + 1
            hull = convex_hull([a, b])
            if len(hull) != 2:
                continue
            mask = rasterize_hull(hull, 48, 48)
            coords = np.argwhere(mask)
            assert mask[a[1], a[0]] == 1 and mask[b[1], b[0]] == 1
            # pixels form one 8-connected chain between the endpoints
            coords_set = {tuple(c) for c in coords.tolist()}
            assert len(coords_set) == len(coords)
            for y, x in coords_set:
                neighbours = sum(
                    (yy, xx) in coords_set
                    for yy in (y - 1, y, y + 1)
                    for xx in (x - 1, x, x + 1)
                    if (yy, xx) != (y, x)
                )
                assert neighbours >= 1 or len(coords_set) == 1


class TestMaskExtremePoints:
    def test_hull_of_extremes_equals_hull_of_all_pixels(self):
        rng = np.random.default_rng(9)
        for _ in range(25):
            m = (rng.random((24, 24)) < 0.3).astype(np.uint8)
            if not m.any():
                continue
            all_pts = np.argwhere(m)[:, ::-1]  # (x, y)
            assert cyclic_equal(
                convex_hull(mask_extreme_points(m)), convex_hull(all_pts)
            )

    def test_empty_mask(self):
        assert len(mask_extreme_points(np.zeros((5, 5), np.uint8))) == 0
