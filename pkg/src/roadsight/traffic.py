"""Driver messages: traffic light state, sign names, proximity warnings.

Light state comes from a hue-band pixel count over the detection crop, a
deterministic stand-in for an upstream classifier. When the detection
already carries a light state (from a fixture or a real classifier), that
value wins.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .distance import DistanceEstimate
from .types import Detection

LIGHT_STATES = ("red", "yellow", "green", "off")


class LightReading(NamedTuple):
    state: str
    low_confidence: bool


@dataclass
class TrafficMessage:
    kind: str  # "pass" | "warning" | "stop" | "sign" | "proximity"
    text: str
    source_detection_id: int
    meters: float | None = None


def _rgb_to_hsv(crop: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Hue in degrees [0, 360), saturation and value in [0, 1]."""
    c = crop.astype(np.float64) / 255.0
    r, g, b = c[..., 0], c[..., 1], c[..., 2]
    mx = c.max(axis=-1)
    mn = c.min(axis=-1)
    d = mx - mn
    hue = np.zeros_like(mx)
    nz = d > 0
    rm = nz & (mx == r)
    gm = nz & ~rm & (mx == g)
    bm = nz & ~rm & ~gm
    hue[rm] = np.mod((g[rm] - b[rm]) / d[rm], 6.0)
    hue[gm] = (b[gm] - r[gm]) / d[gm] + 2.0
    hue[bm] = (r[bm] - g[bm]) / d[bm] + 4.0
    hue *= 60.0
    sat = np.where(mx > 0, d / np.where(mx > 0, mx, 1.0), 0.0)
    return hue, sat, mx


def _in_bands(hue: np.ndarray, bands) -> np.ndarray:
    hit = np.zeros(hue.shape, dtype=bool)
    for lo, hi in bands:
        hit |= (hue >= lo) & (hue <= hi)
    return hit


def classify_light_state(image: np.ndarray, det: Detection, light_cfg) -> LightReading:
    """Dominant saturated hue band inside the bbox, or "off".

    A fixture-supplied ``det.light_state`` overrides the pixels. Crops
    smaller than ``light_cfg.min_area_px`` return ("off", low_confidence).
    """
    if det.light_state is not None:
        return LightReading(det.light_state, False)
    height, width = image.shape[:2]
    x, y, w, h = det.bbox
    x0 = max(0, int(np.floor(x)))
    y0 = max(0, int(np.floor(y)))
    x1 = min(width, int(np.ceil(x + w)))
    y1 = min(height, int(np.ceil(y + h)))
    if x1 <= x0 or y1 <= y0 or (x1 - x0) * (y1 - y0) < light_cfg.min_area_px:
        return LightReading("off", True)
    crop = image[y0:y1, x0:x1]
    hue, sat, val = _rgb_to_hsv(crop)
    lit = (sat >= light_cfg.saturation_min) & (val >= light_cfg.value_min)
    counts = {
        "red": int(np.count_nonzero(lit & _in_bands(hue, light_cfg.hue_red))),
        "yellow": int(np.count_nonzero(lit & _in_bands(hue, light_cfg.hue_yellow))),
        "green": int(np.count_nonzero(lit & _in_bands(hue, light_cfg.hue_green))),
    }
    best = max(counts, key=lambda k: (counts[k], k))
    if counts[best] >= light_cfg.min_frac * crop.shape[0] * crop.shape[1]:
        return LightReading(best, False)
    return LightReading("off", False)


def light_message(state: str, source_detection_id: int = -1) -> TrafficMessage | None:
    """green -> pass, yellow -> warning, red -> stop, off -> no message."""
    mapping = {"green": "pass", "yellow": "warning", "red": "stop"}
    kind = mapping.get(state)
    if kind is None:
        return None
    return TrafficMessage(kind=kind, text=kind, source_detection_id=source_detection_id)


def sign_messages(detections: list[Detection], sign_classes) -> list[TrafficMessage]:
    """One message per sign detection; the text is the class label itself."""
    signs = set(sign_classes)
    return [
        TrafficMessage(kind="sign", text=d.class_label, source_detection_id=d.detection_id)
        for d in detections
        if d.class_label in signs
    ]


def proximity_warnings(
    estimates: list[DistanceEstimate], threshold_m: float
) -> tuple[list[TrafficMessage], float | None]:
    """Warnings for defined estimates strictly below the threshold.

    Also returns the nearest defined distance (None when nothing is
    defined) for the panel readout.
    """
    defined = [e for e in estimates if e.meters is not None]
    messages = [
        TrafficMessage(
            kind="proximity",
            text=f"{e.meters:.1f} m",
            source_detection_id=e.detection_id,
            meters=e.meters,
        )
        for e in defined
        if e.meters < threshold_m
    ]
    nearest = min((e.meters for e in defined), default=None)
    return messages, nearest
