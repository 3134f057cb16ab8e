"""Evaluation arithmetic: mask IoU, detection matching, distance accuracy."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidLabelError
from .types import Detection


@dataclass
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn)


def mask_iou(pred, gt) -> float:
    """Intersection over union of two binary masks.

    Two empty masks count as a perfect prediction of absence: 1.0.
    """
    p = np.asarray(pred).astype(bool)
    g = np.asarray(gt).astype(bool)
    if p.shape != g.shape:
        raise ValueError(f"mask shapes differ: {p.shape} vs {g.shape}")
    union = int(np.count_nonzero(p | g))
    if union == 0:
        return 1.0
    return int(np.count_nonzero(p & g)) / union


def bbox_iou(a, b) -> float:
    """IoU of two (x, y, w, h) boxes."""
    ax, ay, aw, ah = a
    bx, by, bw, bh = b
    ix0 = max(ax, bx)
    iy0 = max(ay, by)
    ix1 = min(ax + aw, bx + bw)
    iy1 = min(ay + ah, by + bh)
    iw = max(0.0, ix1 - ix0)
    ih = max(0.0, iy1 - iy0)
    inter = iw * ih
    union = aw * ah + bw * bh - inter
    if union <= 0:
        return 0.0
    return inter / union


def match_detections(
    preds: list[Detection], gts: list[Detection], iou_thresh: float = 0.5
) -> ConfusionCounts:
    """Greedy score-ordered matching at a strict IoU threshold.

    Each prediction, highest score first, takes the unmatched ground truth
    with the greatest bbox IoU when that IoU exceeds the threshold. Matched
    pairs are true positives; leftovers are false positives / negatives.
    """
    order = sorted(range(len(preds)), key=lambda i: (-preds[i].score, i))
    taken = [False] * len(gts)
    tp = 0
    for i in order:
        best_j = -1
        best_iou = iou_thresh
        for j, gt in enumerate(gts):
            if taken[j]:
                continue
            iou = bbox_iou(preds[i].bbox, gt.bbox)
            if iou > best_iou:
                best_iou = iou
                best_j = j
        if best_j >= 0:
            taken[best_j] = True
            tp += 1
    return ConfusionCounts(tp=tp, fp=len(preds) - tp, fn=len(gts) - tp)


def detection_metrics(c: ConfusionCounts):
    """(precision, recall, f1, accuracy) as fractions; None on a 0 denominator.

    Accuracy here is tp / (tp + fp + fn), the single-threshold form
    consistent with precision and recall on the same counts.
    """
    precision = c.tp / (c.tp + c.fp) if (c.tp + c.fp) > 0 else None
    recall = c.tp / (c.tp + c.fn) if (c.tp + c.fn) > 0 else None
    f1 = None
    if precision is not None and recall is not None and (precision + recall) > 0:
        f1 = 2 * precision * recall / (precision + recall)
    accuracy = c.tp / (c.tp + c.fp + c.fn) if (c.tp + c.fp + c.fn) > 0 else None
    return precision, recall, f1, accuracy


def relative_accuracy(actual: float, predicted: float) -> float:
    """1 - |actual - predicted| / actual; negative for wild predictions."""
    if actual <= 0:
        raise InvalidLabelError(f"actual distance must be > 0, got {actual}")
    return 1.0 - abs(actual - predicted) / actual


def is_correct(ra: float, ra_thresh: float = 0.8) -> bool:
    """A prediction counts as correct only when RA strictly exceeds the bar."""
    return ra > ra_thresh


def distance_report(pairs, ra_thresh: float = 0.8):
    """(mean RA, correct fraction) over (actual, predicted) pairs.

    Empty input has no meaningful statistics: (None, None).
    """
    pairs = list(pairs)
    if not pairs:
        return None, None
    ras = [relative_accuracy(a, p) for a, p in pairs]
    mean_ra = sum(ras) / len(ras)
    accuracy = sum(1 for r in ras if is_correct(r, ra_thresh)) / len(ras)
    return mean_ra, accuracy
