"""Per-frame orchestration, bundle I/O, timing and the benchmark harness.

A frame bundle holds one frame's upstream model outputs; processing fuses
them into the perception result with wall-clock timings per stage. Frames
are independent: the orchestrator may process several concurrently, but
outputs are always written in frame order. A frame whose inputs are broken
is recorded as failed and processing moves on.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import PipelineConfig
from .distance import DistanceEstimate, estimate_distance
from .errors import FormatError, RoadsightError
from .formats import (
    read_depth,
    read_detections,
    read_lanes,
    read_pgm,
    read_ppm,
    write_depth,
    write_detections,
    write_json_doc,
    write_lanes,
    write_pgm,
    write_ppm,
)
from .morphology import StructuringElement
from .roi import RoiMask, build_dynamic_roi, filter_lanes, lane_regions
from .segmentation import RefinedSegMap, refine_all
from .traffic import (
    TrafficMessage,
    classify_light_state,
    light_message,
    proximity_warnings,
    sign_messages,
)
from .types import ClassRegistry, Detection, LaneInstance


@dataclass
class FrameBundle:
    frame_index: int
    depth: np.ndarray                  # (H, W) float32, 0 = invalid
    seg: np.ndarray                    # (H, W) uint8 class ids
    detections: list[Detection] = field(default_factory=list)
    lanes: list[LaneInstance] = field(default_factory=list)
    image: np.ndarray | None = None    # (H, W, 3) uint8


@dataclass
class PerceptionFrameOutput:
    frame_index: int
    ok: bool = True
    error: str | None = None
    filtered_lanes: list[LaneInstance] = field(default_factory=list)
    lane_regions: list[np.ndarray] = field(default_factory=list)
    roi: RoiMask | None = None
    refined: RefinedSegMap | None = None
    estimates: list[DistanceEstimate] = field(default_factory=list)
    messages: list[TrafficMessage] = field(default_factory=list)
    nearest_m: float | None = None
    light_state: str | None = None
    light_low_confidence: bool = False
    stage_timings: dict[str, float] = field(default_factory=dict)  # milliseconds


def _bundle_path(directory, kind: str, frame_index: int, ext: str) -> Path:
    return Path(directory) / f"{kind}_{frame_index:06d}.{ext}"


def read_bundle(directory, frame_index: int, registry: ClassRegistry) -> FrameBundle:
    """Read and strictly validate one frame's files."""
    depth = read_depth(_bundle_path(directory, "depth", frame_index, "dpth"))
    seg_path = _bundle_path(directory, "seg", frame_index, "pgm")
    seg = read_pgm(seg_path)
    if seg.shape != depth.shape:
        raise FormatError(
            seg_path,
            f"dimension mismatch: segmentation {seg.shape[1]}x{seg.shape[0]} "
            f"vs depth {depth.shape[1]}x{depth.shape[0]}",
        )
    for cid in np.unique(seg):
        if not registry.has_id(int(cid)):
            raise FormatError(seg_path, f"unknown class id in seg map: {int(cid)}")
    detections = read_detections(
        _bundle_path(directory, "detections", frame_index, "jsonl"), registry
    )
    lanes_path = _bundle_path(directory, "lanes", frame_index, "json")
    lanes = read_lanes(lanes_path)
    h, w = depth.shape
    for lane in lanes:
        pts = lane.points
        if ((pts[:, 0] < 0) | (pts[:, 0] >= w) | (pts[:, 1] < 0) | (pts[:, 1] >= h)).any():
            raise FormatError(
                lanes_path,
                f"lane instance {lane.instance_id} has points outside the "
                f"{w}x{h} frame",
            )
    image = None
    image_path = _bundle_path(directory, "image", frame_index, "ppm")
    if image_path.exists():
        image = read_ppm(image_path)
        if image.shape[:2] != depth.shape:
            raise FormatError(
                image_path,
                f"dimension mismatch: image {image.shape[1]}x{image.shape[0]} "
                f"vs depth {depth.shape[1]}x{depth.shape[0]}",
            )
    return FrameBundle(
        frame_index=frame_index,
        depth=depth,
        seg=seg,
        detections=detections,
        lanes=lanes,
        image=image,
    )


def write_bundle(directory, bundle: FrameBundle) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    write_depth(_bundle_path(directory, "depth", bundle.frame_index, "dpth"), bundle.depth)
    write_pgm(_bundle_path(directory, "seg", bundle.frame_index, "pgm"), bundle.seg)
    write_detections(
        _bundle_path(directory, "detections", bundle.frame_index, "jsonl"),
        bundle.detections,
    )
    write_lanes(_bundle_path(directory, "lanes", bundle.frame_index, "json"), bundle.lanes)
    if bundle.image is not None:
        write_ppm(_bundle_path(directory, "image", bundle.frame_index, "ppm"), bundle.image)


def list_frames(directory) -> list[int]:
    """Frame indices present in a directory, sorted ascending."""
    out = []
    for p in Path(directory).glob("depth_*.dpth"):
        stem = p.stem.split("_")[-1]
        if stem.isdigit():
            out.append(int(stem))
    return sorted(out)


def process_frame(
    bundle: FrameBundle, cfg: PipelineConfig, registry: ClassRegistry | None = None
) -> PerceptionFrameOutput:
    """Fuse one frame's model outputs; never raises on bad frame data.

    Stage order: segmentation refinement, ROI from the raw road mask, lane
    filtering, lane regions, per-vehicle distance, light/sign/proximity
    messages. A module input error marks the frame failed instead of
    propagating.
    """
    registry = registry or cfg.registry()
    out = PerceptionFrameOutput(frame_index=bundle.frame_index)
    try:
        _process_frame_into(out, bundle, cfg, registry)
    except RoadsightError as exc:
        out.ok = False
        out.error = str(exc)
    return out


def _timed(out: PerceptionFrameOutput, stage: str, fn):
    t0 = time.perf_counter()
    result = fn()
    out.stage_timings[stage] = (time.perf_counter() - t0) * 1000.0
    return result


def _process_frame_into(out, bundle, cfg, registry) -> None:
    if bundle.seg.shape != bundle.depth.shape:
        raise RoadsightError(
            f"frame {bundle.frame_index}: segmentation and depth dimensions differ"
        )
    height, width = bundle.depth.shape
    se = StructuringElement.disc(cfg.se_radius_for_width(width))
    refine_ids = [registry.id_of(name) for name in cfg.refine_classes]

    out.refined = _timed(
        out, "refine_seg", lambda: refine_all(bundle.seg, refine_ids, se, cfg.min_area_frac)
    )
    out.roi = _timed(
        out,
        "build_roi",
        lambda: build_dynamic_roi(
            bundle.seg, registry.id_of(cfg.road_class), se, bundle.frame_index
        ),
    )
    out.filtered_lanes = _timed(
        out, "filter_lanes", lambda: filter_lanes(bundle.lanes, out.roi, cfg.keep_fraction)
    )
    out.lane_regions = _timed(
        out, "lane_regions", lambda: lane_regions(out.filtered_lanes, out.roi)
    )

    def run_distance():
        estimates = []
        for det in bundle.detections:
            if det.class_label in cfg.distance_classes:
                estimates.append(
                    estimate_distance(bundle.depth, out.refined, det, cfg, registry)
                )
        return estimates

    out.estimates = _timed(out, "distance", run_distance)

    def run_messages():
        messages: list[TrafficMessage] = []
        lights = [d for d in bundle.detections if d.class_label == "traffic_light"]
        if lights:
            # with several lights, the nearest (largest bbox) one speaks
            lead = max(lights, key=lambda d: (d.bbox[2] * d.bbox[3], -d.detection_id))
            if bundle.image is not None or lead.light_state is not None:
                reading = classify_light_state(bundle.image, lead, cfg.light)
                out.light_state = reading.state
                out.light_low_confidence = reading.low_confidence
                msg = light_message(reading.state, lead.detection_id)
                if msg is not None:
                    messages.append(msg)
        messages.extend(sign_messages(bundle.detections, cfg.sign_classes))
        proximity, nearest = proximity_warnings(out.estimates, cfg.proximity_threshold_m)
        messages.extend(proximity)
        out.nearest_m = nearest
        return messages

    out.messages = _timed(out, "messages", run_messages)


def output_to_doc(out: PerceptionFrameOutput, bundle: FrameBundle | None = None) -> dict:
    """JSON-ready document for one frame's result.

    Stage timings are deliberately absent: the document is a pure function
    of the frame and config, so identical runs produce identical bytes.
    Timings are written separately (see write_output).
    """
    doc = {
        "frame_index": out.frame_index,
        "ok": out.ok,
        "error": out.error,
        "roi_degenerate": None if out.roi is None else bool(out.roi.degenerate),
        "lanes": [
            {"id": int(l.instance_id), "points": [[int(x), int(y)] for x, y in l.points]}
            for l in out.filtered_lanes
        ],
        "estimates": [
            {
                "detection_id": e.detection_id,
                "meters": e.meters,
                "inlier_count": e.inlier_count,
                "stage_trace": e.stage_trace,
            }
            for e in out.estimates
        ],
        "messages": [
            {
                "kind": m.kind,
                "text": m.text,
                "source_detection_id": m.source_detection_id,
                "meters": m.meters,
            }
            for m in out.messages
        ],
        "nearest_m": out.nearest_m,
        "light_state": out.light_state,
        "refined_hulls": {}
        if out.refined is None
        else {
            str(cid): [[[int(x), int(y)] for x, y in hull] for hull in hulls]
            for cid, hulls in out.refined.hulls.items()
        },
    }
    if bundle is not None:
        doc["detections"] = [
            {
                "id": d.detection_id,
                "class": d.class_label,
                "score": d.score,
                "bbox": [float(v) for v in d.bbox],
                "light_state": d.light_state,
            }
            for d in bundle.detections
        ]
    return doc


def write_output(
    out_dir,
    out: PerceptionFrameOutput,
    bundle: FrameBundle | None = None,
    render_image: np.ndarray | None = None,
) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    idx = out.frame_index
    write_json_doc(out_dir / f"output_{idx:06d}.json", output_to_doc(out, bundle))
    if out.roi is not None:
        write_pgm(out_dir / f"roi_{idx:06d}.pgm", out.roi.mask)
    if out.refined is not None:
        write_pgm(out_dir / f"segrefined_{idx:06d}.pgm", out.refined.class_ids)
    if out.lane_regions:
        combined = np.zeros_like(out.lane_regions[0])
        for i, region in enumerate(out.lane_regions):
            combined[region > 0] = i + 1
        write_pgm(out_dir / f"laneregions_{idx:06d}.pgm", combined)
    elif out.roi is not None:
        write_pgm(
            out_dir / f"laneregions_{idx:06d}.pgm",
            np.zeros_like(out.roi.mask),
        )
    if render_image is not None:
        write_ppm(out_dir / f"render_{idx:06d}.ppm", render_image)


def run_directory(
    input_dir, out_dir, cfg: PipelineConfig, render: bool = False
) -> dict:
    """Process every frame in a directory; returns a run summary.

    Frames with format errors are recorded as failed and skipped, the rest
    are still processed; the summary lists every format diagnostic so the
    caller can report a non-zero exit.
    """
    from .render import render_frame

    registry = cfg.registry()
    indices = list_frames(input_dir)
    format_errors: list[str] = []
    failed = 0

    def work(idx: int):
        try:
            bundle = read_bundle(input_dir, idx, registry)
        except FormatError as exc:
            return None, None, None, exc
        out = process_frame(bundle, cfg, registry)
        image = None
        if render and out.ok and bundle.image is not None:
            image = render_frame(bundle, out, cfg, registry)
        return bundle, out, image, None

    if cfg.max_workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.max_workers) as pool:
            results = list(pool.map(work, indices))
    else:
        results = [work(idx) for idx in indices]

    for idx, (bundle, out, image, exc) in zip(indices, results):
        if exc is not None:
            format_errors.append(str(exc))
            failed += 1
            failed_out = PerceptionFrameOutput(frame_index=idx, ok=False, error=str(exc))
            write_output(out_dir, failed_out)
            continue
        if not out.ok:
            failed += 1
        write_output(out_dir, out, bundle, image)

    summary = {
        "frames": len(indices),
        "failed": failed,
        "format_errors": format_errors,
    }
    write_json_doc(Path(out_dir) / "run_summary.json", summary)
    return summary


def benchmark(input_dir, iterations: int, cfg: PipelineConfig) -> dict:
    """Per-stage and end-to-end timing over preloaded bundles.

    Model inference is upstream; this measures only the post-processing
    pipeline. One untimed warmup pass absorbs allocator and cache effects.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    registry = cfg.registry()
    indices = list_frames(input_dir)
    if not indices:
        raise RoadsightError(f"no frames found in {input_dir}")
    bundles = [read_bundle(input_dir, idx, registry) for idx in indices]

    process_frame(bundles[0], cfg, registry)  # warmup, not sampled

    stage_samples: dict[str, list[float]] = {}
    total_samples: list[float] = []
    for _ in range(iterations):
        for bundle in bundles:
            t0 = time.perf_counter()
            out = process_frame(bundle, cfg, registry)
            total_samples.append((time.perf_counter() - t0) * 1000.0)
            for stage, ms in out.stage_timings.items():
                stage_samples.setdefault(stage, []).append(ms)

    def stats(samples: list[float]) -> dict:
        arr = np.asarray(samples)
        return {
            "mean_ms": float(arr.mean()),
            "p50_ms": float(np.percentile(arr, 50)),
            "p95_ms": float(np.percentile(arr, 95)),
            "samples": len(samples),
        }

    mean_total = float(np.mean(total_samples))
    return {
        "frames": len(bundles),
        "iterations": iterations,
        "stages": {name: stats(s) for name, s in sorted(stage_samples.items())},
        "end_to_end": stats(total_samples),
        "fps": 1000.0 / mean_total,
    }
