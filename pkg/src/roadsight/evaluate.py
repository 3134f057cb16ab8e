"""Directory-level evaluation: pipeline outputs against ground truth.

``pred_dir`` is a `run` output directory (per-frame JSON plus mask grids);
``gt_dir`` is the input directory with ground-truth annex files, as written
by the synthetic scene generator or a labelling tool. Produces one report
document with detection confusion metrics per class, lane and sidewalk
IoU, distance relative accuracy and a timing summary.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .config import PipelineConfig
from .errors import FormatError
from .formats import read_json_doc, read_pgm, write_json_doc
from .metrics import (
    ConfusionCounts,
    bbox_iou,
    detection_metrics,
    is_correct,
    mask_iou,
    match_detections,
    relative_accuracy,
)
from .types import Detection


def _gt_frames(gt_dir) -> list[int]:
    out = []
    for p in Path(gt_dir).glob("gt_*.json"):
        stem = p.stem.split("_")[-1]
        if stem.isdigit():
            out.append(int(stem))
    return sorted(out)


def _load_pred_frame(pred_dir, idx: int) -> dict:
    return read_json_doc(Path(pred_dir) / f"output_{idx:06d}.json")


def _dets_from_doc(doc: dict) -> list[Detection]:
    dets = []
    for rec in doc.get("detections", []):
        dets.append(
            Detection(
                detection_id=int(rec["id"]),
                class_label=rec["class"],
                score=float(rec["score"]),
                bbox=tuple(float(v) for v in rec["bbox"]),
                light_state=rec.get("light_state"),
            )
        )
    return dets


def _gt_detections(gt: dict) -> list[Detection]:
    dets = []
    for i, obj in enumerate(gt.get("objects", [])):
        dets.append(
            Detection(
                detection_id=i,
                class_label=obj["class"],
                score=1.0,
                bbox=tuple(float(v) for v in obj["bbox"]),
            )
        )
    return dets


def _pair_regions(pred: np.ndarray, gt: np.ndarray) -> list[float]:
    """IoU per lane region, pairing pred and gt strips by their index."""
    n = max(int(pred.max()), int(gt.max()))
    return [mask_iou(pred == k, gt == k) for k in range(1, n + 1)]


def evaluate_directories(pred_dir, gt_dir, cfg: PipelineConfig) -> dict:
    registry = cfg.registry()
    indices = _gt_frames(gt_dir)
    if not indices:
        raise FormatError(gt_dir, "no gt_*.json annex files found")

    counts: dict[str, ConfusionCounts] = {}
    lane_ious: list[float] = []
    sidewalk_ious: list[float] = []
    ra_values: list[float] = []
    stage_sums: dict[str, float] = {}
    stage_n = 0
    frames_evaluated = 0

    sidewalk_id = registry.id_of("sidewalk") if registry.has_name("sidewalk") else None

    for idx in indices:
        gt = read_json_doc(Path(gt_dir) / f"gt_{idx:06d}.json")
        try:
            doc = _load_pred_frame(pred_dir, idx)
        except FormatError:
            # frame missing from the prediction run counts everything as missed
            for det in _gt_detections(gt):
                counts.setdefault(det.class_label, ConfusionCounts()).fn += 1
            continue
        frames_evaluated += 1

        preds = _dets_from_doc(doc)
        gts = _gt_detections(gt)
        for cls in sorted({d.class_label for d in preds} | {d.class_label for d in gts}):
            c = match_detections(
                [d for d in preds if d.class_label == cls],
                [d for d in gts if d.class_label == cls],
                cfg.iou_threshold,
            )
            counts[cls] = counts.get(cls, ConfusionCounts()) + c

        # lane strips
        pred_regions_path = Path(pred_dir) / f"laneregions_{idx:06d}.pgm"
        gt_strips_path = Path(gt_dir) / f"gtlanes_{idx:06d}.pgm"
        if pred_regions_path.exists() and gt_strips_path.exists():
            lane_ious.extend(
                _pair_regions(read_pgm(pred_regions_path), read_pgm(gt_strips_path))
            )

        # sidewalk: refined prediction vs the exact class mask
        seg_path = Path(gt_dir) / f"seg_{idx:06d}.pgm"
        pred_seg_path = Path(pred_dir) / f"segrefined_{idx:06d}.pgm"
        if sidewalk_id is not None and seg_path.exists() and pred_seg_path.exists():
            gt_mask = read_pgm(seg_path) == sidewalk_id
            pred_mask = read_pgm(pred_seg_path) == sidewalk_id
            if gt_mask.any() or pred_mask.any():
                sidewalk_ious.append(mask_iou(pred_mask, gt_mask))

        # distances: pair echoed detections with gt objects by bbox IoU
        meters = {e["detection_id"]: e["meters"] for e in doc.get("estimates", [])}
        order = sorted(range(len(preds)), key=lambda i: (-preds[i].score, i))
        taken = [False] * len(gts)
        for i in order:
            if preds[i].detection_id not in meters:
                continue
            if meters[preds[i].detection_id] is None:
                continue
            best_j, best_iou = -1, cfg.iou_threshold
            for j, g in enumerate(gts):
                if taken[j] or g.class_label != preds[i].class_label:
                    continue
                iou = bbox_iou(preds[i].bbox, g.bbox)
                if iou > best_iou:
                    best_iou, best_j = iou, j
            if best_j >= 0:
                taken[best_j] = True
                actual = float(gt["objects"][best_j]["distance_m"])
                ra_values.append(relative_accuracy(actual, meters[preds[i].detection_id]))

        for stage, ms in doc.get("stage_timings_ms", {}).items():
            stage_sums[stage] = stage_sums.get(stage, 0.0) + float(ms)
        stage_n += 1

    per_class = {}
    for cls, c in sorted(counts.items()):
        precision, recall, f1, accuracy = detection_metrics(c)
        per_class[cls] = {
            "tp": c.tp,
            "fp": c.fp,
            "fn": c.fn,
            "precision": precision,
            "recall": recall,
            "f1": f1,
            "accuracy": accuracy,
        }

    report = {
        "frames": frames_evaluated,
        "detection": per_class,
        "lane_iou": {
            "values": lane_ious,
            "mean": float(np.mean(lane_ious)) if lane_ious else None,
            "valid_fraction": (
                float(np.mean([iou > cfg.iou_threshold for iou in lane_ious]))
                if lane_ious
                else None
            ),
        },
        "sidewalk_iou": {
            "values": sidewalk_ious,
            "mean": float(np.mean(sidewalk_ious)) if sidewalk_ious else None,
            "valid_fraction": (
                float(np.mean([iou > cfg.iou_threshold for iou in sidewalk_ious]))
                if sidewalk_ious
                else None
            ),
        },
        "distance": {
            "ra_values": ra_values,
            "mean_ra": float(np.mean(ra_values)) if ra_values else None,
            "accuracy": (
                float(np.mean([is_correct(r, cfg.ra_threshold) for r in ra_values]))
                if ra_values
                else None
            ),
        },
        "timing_ms": {
            stage: total / stage_n for stage, total in sorted(stage_sums.items())
        }
        if stage_n
        else {},
    }
    return report


def write_report(report: dict, path) -> None:
    write_json_doc(path, report)
