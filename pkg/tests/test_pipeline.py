from dataclasses import replace

import numpy as np
import pytest

from roadsight.config import PipelineConfig
from roadsight.pipeline import (
    FrameBundle,
    benchmark,
    list_frames,
    process_frame,
    read_bundle,
    run_directory,
    write_bundle,
)
from roadsight.errors import FormatError
from roadsight.formats import read_json_doc
from roadsight.synth import render_scene, sample_scene, write_scene
from roadsight.types import ClassRegistry

CFG = PipelineConfig()
REGISTRY = ClassRegistry()


def scene_bundle(seed=1):
    scene = render_scene(sample_scene(seed))
    return scene, FrameBundle(
        frame_index=0,
        depth=scene.depth,
        seg=scene.seg,
        detections=scene.detections,
        lanes=scene.lanes,
        image=scene.image,
    )


class TestProcessFrame:
    def test_clean_scene_distances_near_ground_truth(self):
        # a centered mid-range box keeps the face range spread far below 0.1%
        from roadsight.synth import SceneObject, SceneSpec

        spec = SceneSpec(
            seed=4,
            camera_height=0.8,
            objects=(SceneObject("car", (0.0, 0.8, 25.0), (1.6, 1.6, 3.0)),),
        )
        scene = render_scene(spec)
        bundle = FrameBundle(0, scene.depth, scene.seg, scene.detections, scene.lanes)
        out = process_frame(bundle, CFG, REGISTRY)
        assert out.ok
        (est,) = out.estimates
        gt = scene.ground_truth[0]["distance_m"]
        assert est.meters == pytest.approx(gt, rel=0.001)

    def test_zero_detections_still_filters_lanes(self):
        scene, bundle = scene_bundle(2)
        bundle.detections = []
        out = process_frame(bundle, CFG, REGISTRY)
        assert out.ok
        assert out.estimates == []
        assert len(out.filtered_lanes) >= 2

    def test_dimension_mismatch_marks_frame_failed(self):
        scene, bundle = scene_bundle(3)
        bundle.seg = bundle.seg[:-10]
        out = process_frame(bundle, CFG, REGISTRY)
        assert not out.ok
        assert "dimensions differ" in out.error

    def test_deterministic(self):
        scene, bundle = scene_bundle(5)
        a = process_frame(bundle, CFG, REGISTRY)
        b = process_frame(bundle, CFG, REGISTRY)
        assert [e.meters for e in a.estimates] == [e.meters for e in b.estimates]
        assert a.nearest_m == b.nearest_m
        assert len(a.filtered_lanes) == len(b.filtered_lanes)
        for la, lb in zip(a.filtered_lanes, b.filtered_lanes):
            assert np.array_equal(la.points, lb.points)

    def test_every_stage_timed(self):
        scene, bundle = scene_bundle(6)
        out = process_frame(bundle, CFG, REGISTRY)
        assert set(out.stage_timings) == {
            "refine_seg",
            "build_roi",
            "filter_lanes",
            "lane_regions",
            "distance",
            "messages",
        }
        assert all(ms >= 0 for ms in out.stage_timings.values())

    def test_surviving_lane_points_inside_roi(self):
        scene, bundle = scene_bundle(7)
        out = process_frame(bundle, CFG, REGISTRY)
        for lane in out.filtered_lanes:
            for x, y in lane.points:
                assert out.roi.mask[y, x] == 1

    def test_light_state_read_from_image(self):
        scene, bundle = scene_bundle(1)  # sampled scene 1 carries a light
        lights = [d for d in bundle.detections if d.class_label == "traffic_light"]
        if not lights:
            pytest.skip("scene has no light")
        out = process_frame(bundle, CFG, REGISTRY)
        spec_state = next(
            o.light_state for o in scene.spec.objects if o.class_name == "traffic_light"
        )
        assert out.light_state == spec_state


class TestBundleIO:
    def test_write_read_round_trip(self, tmp_path):
        scene, bundle = scene_bundle(9)
        write_bundle(tmp_path, bundle)
        back = read_bundle(tmp_path, 0, REGISTRY)
        assert np.array_equal(back.depth, bundle.depth)
        assert np.array_equal(back.seg, bundle.seg)
        assert np.array_equal(back.image, bundle.image)
        assert len(back.detections) == len(bundle.detections)
        for a, b in zip(back.detections, bundle.detections):
            assert a.class_label == b.class_label and a.bbox == b.bbox
        assert len(back.lanes) == len(bundle.lanes)
        for a, b in zip(back.lanes, bundle.lanes):
            assert np.array_equal(a.points, b.points)

    def test_unknown_seg_class_id_named(self, tmp_path):
        scene, bundle = scene_bundle(10)
        bundle.seg = bundle.seg.copy()
        bundle.seg[0, 0] = 99
        write_bundle(tmp_path, bundle)
        with pytest.raises(FormatError) as err:
            read_bundle(tmp_path, 0, REGISTRY)
        assert "99" in str(err.value)

    def test_dimension_mismatch_between_files(self, tmp_path):
        from roadsight.formats import write_pgm

        scene, bundle = scene_bundle(11)
        write_bundle(tmp_path, bundle)
        write_pgm(tmp_path / "seg_000000.pgm", bundle.seg[:100])
        with pytest.raises(FormatError) as err:
            read_bundle(tmp_path, 0, REGISTRY)
        assert "dimension mismatch" in str(err.value)

    def test_list_frames_sorted(self, tmp_path):
        for idx in (3, 0, 12):
            scene, bundle = scene_bundle(12)
            bundle.frame_index = idx
            write_bundle(tmp_path, bundle)
        assert list_frames(tmp_path) == [0, 3, 12]


class TestRunDirectory:
    def test_clean_run(self, tmp_path):
        in_dir, out_dir = tmp_path / "in", tmp_path / "out"
        for i in range(3):
            write_scene(render_scene(sample_scene(20 + i)), in_dir, i)
        summary = run_directory(in_dir, out_dir, CFG)
        assert summary == {"frames": 3, "failed": 0, "format_errors": []}
        for i in range(3):
            doc = read_json_doc(out_dir / f"output_{i:06d}.json")
            assert doc["ok"] is True
            assert (out_dir / f"roi_{i:06d}.pgm").exists()
            assert (out_dir / f"laneregions_{i:06d}.pgm").exists()
            assert (out_dir / f"segrefined_{i:06d}.pgm").exists()

    def test_corrupt_depth_skipped_and_reported(self, tmp_path):
        in_dir, out_dir = tmp_path / "in", tmp_path / "out"
        for i in range(3):
            write_scene(render_scene(sample_scene(30 + i)), in_dir, i)
        depth_path = in_dir / "depth_000001.dpth"
        depth_path.write_bytes(depth_path.read_bytes()[:50])
        summary = run_directory(in_dir, out_dir, CFG)
        assert summary["frames"] == 3 and summary["failed"] == 1
        assert len(summary["format_errors"]) == 1
        assert "depth_000001.dpth" in summary["format_errors"][0]
        # the broken frame is recorded, the others processed
        assert read_json_doc(out_dir / "output_000001.json")["ok"] is False
        assert read_json_doc(out_dir / "output_000002.json")["ok"] is True

    def test_concurrent_run_matches_serial(self, tmp_path):
        in_dir = tmp_path / "in"
        for i in range(4):
            write_scene(render_scene(sample_scene(40 + i)), in_dir, i)
        serial_dir, conc_dir = tmp_path / "serial", tmp_path / "conc"
        run_directory(in_dir, serial_dir, CFG)
        run_directory(in_dir, conc_dir, replace(CFG, max_workers=4))
        for i in range(4):
            a = (serial_dir / f"output_{i:06d}.json").read_bytes()
            b = (conc_dir / f"output_{i:06d}.json").read_bytes()
            assert a == b

    def test_rendered_frames_written(self, tmp_path):
        in_dir, out_dir = tmp_path / "in", tmp_path / "out"
        write_scene(render_scene(sample_scene(50)), in_dir, 0)
        run_directory(in_dir, out_dir, CFG, render=True)
        assert (out_dir / "render_000000.ppm").exists()


class TestBenchmark:
    def test_two_iterations_two_samples_per_stage(self, tmp_path):
        in_dir = tmp_path / "in"
        write_scene(render_scene(sample_scene(60)), in_dir, 0)
        report = benchmark(in_dir, 2, CFG)
        assert report["frames"] == 1 and report["iterations"] == 2
        for s in report["stages"].values():
            assert s["samples"] == 2
        assert report["end_to_end"]["samples"] == 2

    def test_stage_sum_bounded_by_end_to_end(self, tmp_path):
        in_dir = tmp_path / "in"
        for i in range(2):
            write_scene(render_scene(sample_scene(70 + i)), in_dir, i)
        report = benchmark(in_dir, 3, CFG)
        stage_mean_sum = sum(s["mean_ms"] for s in report["stages"].values())
        assert stage_mean_sum <= report["end_to_end"]["mean_ms"] + 1e-6

    def test_fps_definition(self, tmp_path):
        in_dir = tmp_path / "in"
        write_scene(render_scene(sample_scene(80)), in_dir, 0)
        report = benchmark(in_dir, 2, CFG)
        assert report["fps"] == pytest.approx(
            1000.0 / report["end_to_end"]["mean_ms"]
        )

    def test_empty_directory_rejected(self, tmp_path):
        from roadsight.errors import RoadsightError

        with pytest.raises(RoadsightError):
            benchmark(tmp_path, 1, CFG)
