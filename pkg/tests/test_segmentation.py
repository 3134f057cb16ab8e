import numpy as np

from roadsight.hull import convex_hull, mask_extreme_points, rasterize_hull
from roadsight.morphology import StructuringElement, dilate, fill_holes
from roadsight.segmentation import refine_all, refine_class

SE2 = StructuringElement.disc(2)


class TestRefineClass:
    def test_solid_convex_blob_survives_with_one_hull(self):
        seg = np.zeros((60, 100), np.uint8)
        seg[10:40, 20:60] = 3  # area 1200 = 0.2 of frame
        mask, hulls = refine_class(seg, 3, SE2, 0.002)
        assert len(hulls) == 1
        assert not np.any((seg == 3) & (mask == 0))  # refined superset of blob

    def test_speckles_below_threshold_removed(self):
        # 640x360 at min_area_frac 0.002 -> threshold 460.8 px; a 3-px speck
        # dilated by a disc of radius 2 stays far below it
        seg = np.zeros((360, 640), np.uint8)
        seg[100:200, 100:300] = 2  # big blob, 20000 px
        for y, x in ((20, 20), (40, 600), (300, 50), (350, 620)):
            seg[y, x : x + 3] = 2
        mask, hulls = refine_class(seg, 2, SE2, 0.002)
        assert len(hulls) == 1
        assert mask[20, 20] == 0 and mask[40, 600] == 0
        assert mask[150, 200] == 1

    def test_concave_region_becomes_its_hull(self):
        seg = np.zeros((50, 50), np.uint8)
        seg[10:40, 10:18] = 4  # C shape: left bar
        seg[10:16, 10:40] = 4  # top bar
        seg[34:40, 10:40] = 4  # bottom bar
        mask, hulls = refine_class(seg, 4, SE2, 0.002)
        assert len(hulls) == 1
        grown = fill_holes(dilate(seg == 4, SE2))
        expected = rasterize_hull(convex_hull(mask_extreme_points(grown)), 50, 50)
        assert np.array_equal(mask, expected)
        assert mask[25, 30] == 1  # concavity compensated

    def test_absent_class_is_empty(self):
        seg = np.zeros((20, 20), np.uint8)
        mask, hulls = refine_class(seg, 5, SE2, 0.002)
        assert mask.sum() == 0 and hulls == []

    def test_extensive_modulo_thresholding(self):
        rng = np.random.default_rng(41)
        for _ in range(10):
            seg = np.zeros((48, 64), np.uint8)
            y, x = rng.integers(5, 25), rng.integers(5, 30)
            seg[y : y + rng.integers(10, 20), x : x + rng.integers(10, 30)] = 3
            mask, _ = refine_class(seg, 3, SE2, 0.002)
            grown = fill_holes(dilate(seg == 3, SE2))
            assert not np.any(grown & (mask == 0))

    def test_windowing_matches_border_touching_class(self):
        # a class touching the frame border must behave as if processed on
        # the full frame
        seg = np.zeros((40, 40), np.uint8)
        seg[0:15, 0:12] = 2
        mask, hulls = refine_class(seg, 2, SE2, 0.002)
        grown = fill_holes(dilate(seg == 2, SE2))
        expected = rasterize_hull(convex_hull(mask_extreme_points(grown)), 40, 40)
        assert np.array_equal(mask, expected)


class TestRefineAll:
    def test_single_class_matches_refine_class(self):
        seg = np.zeros((40, 60), np.uint8)
        seg[5:25, 10:40] = 3
        refined = refine_all(seg, [3], SE2, 0.002)
        mask, hulls = refine_class(seg, 3, SE2, 0.002)
        assert np.array_equal(refined.masks[3], mask)
        assert np.array_equal(refined.class_ids == 3, mask.astype(bool))
        assert len(refined.hulls[3]) == len(hulls)

    def test_overlap_resolved_by_earlier_registry_id(self):
        seg = np.zeros((40, 60), np.uint8)
        seg[10:30, 10:30] = 2
        seg[10:30, 28:48] = 3  # refined masks will overlap after dilation
        refined = refine_all(seg, [2, 3], SE2, 0.002)
        overlap = (refined.masks[2] > 0) & (refined.masks[3] > 0)
        assert overlap.any()
        assert (refined.class_ids[overlap] == 2).all()

    def test_per_class_masks_equal_hull_unions(self):
        seg = np.zeros((40, 60), np.uint8)
        seg[5:20, 5:25] = 2
        seg[25:38, 30:55] = 4
        refined = refine_all(seg, [2, 4], SE2, 0.002)
        for cid in (2, 4):
            union = np.zeros_like(refined.masks[cid])
            for hull in refined.hulls[cid]:
                union |= rasterize_hull(hull, 60, 40)
            assert np.array_equal(refined.masks[cid], union)

    def test_untouched_classes_copied_through(self):
        seg = np.zeros((30, 30), np.uint8)
        seg[0:10, 0:10] = 1   # road, untouched
        seg[20:28, 20:28] = 3
        refined = refine_all(seg, [3], SE2, 0.002)
        assert (refined.class_ids[0:10, 0:10] == 1).all()

    def test_empty_map_stays_empty(self):
        seg = np.zeros((20, 20), np.uint8)
        refined = refine_all(seg, [2, 3, 4], SE2, 0.002)
        assert refined.class_ids.sum() == 0
        assert all(m.sum() == 0 for m in refined.masks.values())

    def test_each_refined_region_component_is_convex(self):
        # re-hulling any connected component of a refined mask reproduces it
        from roadsight.morphology import label_mask

        seg = np.zeros((50, 70), np.uint8)
        seg[8:28, 8:30] = 2
        seg[30:45, 40:66] = 2
        refined = refine_all(seg, [2], SE2, 0.002)
        labels, n = label_mask(refined.masks[2])
        for k in range(1, n + 1):
            comp = (labels == k).astype(np.uint8)
            re_hull = rasterize_hull(
                convex_hull(mask_extreme_points(comp)), 70, 50
            )
            assert np.array_equal(comp, re_hull)

    def test_deterministic(self):
        rng = np.random.default_rng(43)
        seg = (rng.random((40, 60)) < 0.2).astype(np.uint8) * 2
        seg[(rng.random((40, 60)) < 0.1)] = 3
        a = refine_all(seg, [2, 3], SE2, 0.002)
        b = refine_all(seg, [2, 3], SE2, 0.002)
        assert np.array_equal(a.class_ids, b.class_ids)
        for cid in (2, 3):
            assert np.array_equal(a.masks[cid], b.masks[cid])
            assert len(a.hulls[cid]) == len(b.hulls[cid])
            for ha, hb in zip(a.hulls[cid], b.hulls[cid]):
                assert np.array_equal(ha, hb)
