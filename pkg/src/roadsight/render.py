"""Frame annotation and the driver information side panel.

Pure integer raster drawing on numpy arrays: Bresenham lines, rectangle
outlines, 3:1 integer alpha blends and a built-in 5x7 bitmap font, so a
fixed input renders to identical bytes on every run and platform. Text is
uppercased before lookup; unknown glyphs draw as a hollow box.
"""

from __future__ import annotations

import numpy as np

# 5x7 glyphs, 7 rows of 5 bits each, MSB = leftmost column.
_GLYPHS = {
    "A": (0x0E, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11),
    "B": (0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E),
    "C": (0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E),
    "D": (0x1E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x1E),
    "E": (0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F),
    "F": (0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x10),
    "G": (0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F),
    "H": (0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11),
    "I": (0x0E, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E),
    "J": (0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0C),
    "K": (0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11),
    "L": (0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F),
    "M": (0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11),
    "N": (0x11, 0x19, 0x15, 0x13, 0x11, 0x11, 0x11),
    "O": (0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E),
    "P": (0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10),
    "Q": (0x0E, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0D),
    "R": (0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11),
    "S": (0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E),
    "T": (0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04),
    "U": (0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E),
    "V": (0x11, 0x11, 0x11, 0x11, 0x0A, 0x0A, 0x04),
    "W": (0x11, 0x11, 0x11, 0x15, 0x15, 0x1B, 0x11),
    "X": (0x11, 0x11, 0x0A, 0x04, 0x0A, 0x11, 0x11),
    "Y": (0x11, 0x11, 0x0A, 0x04, 0x04, 0x04, 0x04),
    "Z": (0x1F, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1F),
    "0": (0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E),
    "1": (0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E),
    "2": (0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F),
    "3": (0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E),
    "4": (0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02),
    "5": (0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E),
    "6": (0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E),
    "7": (0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08),
    "8": (0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E),
    "9": (0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C),
    " ": (0, 0, 0, 0, 0, 0, 0),
    ".": (0, 0, 0, 0, 0, 0x0C, 0x0C),
    ",": (0, 0, 0, 0, 0x0C, 0x04, 0x08),
    "-": (0, 0, 0, 0x1F, 0, 0, 0),
    "_": (0, 0, 0, 0, 0, 0, 0x1F),
    ":": (0, 0x0C, 0x0C, 0, 0x0C, 0x0C, 0),
    "/": (0x01, 0x02, 0x04, 0x04, 0x04, 0x08, 0x10),
    "%": (0x19, 0x1A, 0x02, 0x04, 0x08, 0x0B, 0x13),
    "(": (0x02, 0x04, 0x08, 0x08, 0x08, 0x04, 0x02),
    ")": (0x08, 0x04, 0x02, 0x02, 0x02, 0x04, 0x08),
    "+": (0, 0x04, 0x04, 0x1F, 0x04, 0x04, 0),
}
_UNKNOWN = (0x1F, 0x11, 0x11, 0x11, 0x11, 0x11, 0x1F)

GLYPH_W, GLYPH_H = 5, 7
PANEL_WIDTH = 180
PANEL_BG = (28, 30, 34)

CLASS_COLORS = {
    "car": (80, 200, 255),
    "bus": (255, 170, 60),
    "person": (255, 90, 90),
    "traffic_light": (250, 250, 120),
    "traffic_sign": (220, 140, 255),
}
LIGHT_COLORS = {
    "red": (230, 40, 40),
    "yellow": (240, 210, 50),
    "green": (60, 220, 80),
    "off": (90, 90, 90),
}
LANE_COLOR = (60, 255, 120)
SIDEWALK_TINT = (255, 120, 200)


def draw_text(img: np.ndarray, x: int, y: int, text: str, color, scale: int = 1) -> None:
    h, w = img.shape[:2]
    cx = x
    for ch in text.upper():
        rows = _GLYPHS.get(ch, _UNKNOWN)
        for ry, bits in enumerate(rows):
            for rx in range(GLYPH_W):
                if bits & (1 << (GLYPH_W - 1 - rx)):
                    y0, x0 = y + ry * scale, cx + rx * scale
                    y1, x1 = min(h, y0 + scale), min(w, x0 + scale)
                    if y0 < h and x0 < w and y0 >= 0 and x0 >= 0:
                        img[y0:y1, x0:x1] = color
        cx += (GLYPH_W + 1) * scale


def text_width(text: str, scale: int = 1) -> int:
    return len(text) * (GLYPH_W + 1) * scale


def draw_line(img: np.ndarray, p0, p1, color) -> None:
    h, w = img.shape[:2]
    x0, y0 = int(p0[0]), int(p0[1])
    x1, y1 = int(p1[0]), int(p1[1])
    dx, dy = abs(x1 - x0), -abs(y1 - y0)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    err = dx + dy
    while True:
        if 0 <= y0 < h and 0 <= x0 < w:
            img[y0, x0] = color
        if x0 == x1 and y0 == y1:
            break
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x0 += sx
        if e2 <= dx:
            err += dx
            y0 += sy


def draw_polyline(img: np.ndarray, points, color) -> None:
    pts = np.asarray(points)
    for a, b in zip(pts[:-1], pts[1:]):
        draw_line(img, a, b, color)


def draw_rect(img: np.ndarray, bbox, color) -> None:
    x, y, w, h = (int(round(v)) for v in bbox)
    draw_line(img, (x, y), (x + w - 1, y), color)
    draw_line(img, (x + w - 1, y), (x + w - 1, y + h - 1), color)
    draw_line(img, (x + w - 1, y + h - 1), (x, y + h - 1), color)
    draw_line(img, (x, y + h - 1), (x, y), color)


def blend_mask(img: np.ndarray, mask: np.ndarray, color) -> None:
    """In-place 3:1 blend of color over masked pixels, integer-exact."""
    sel = np.asarray(mask).astype(bool)
    mixed = (img[sel].astype(np.uint16) * 3 + np.asarray(color, dtype=np.uint16)) // 4
    img[sel] = mixed.astype(np.uint8)


def render_frame(bundle, output, cfg, registry) -> np.ndarray:
    """Annotated frame plus the information panel on the right.

    Pure function of the inputs: same bundle and output give identical
    bytes. Requires ``bundle.image``.
    """
    if bundle.image is None:
        raise ValueError("render_frame needs bundle.image")
    h, w = bundle.image.shape[:2]
    canvas = np.zeros((h, w + PANEL_WIDTH, 3), dtype=np.uint8)
    canvas[:, :w] = bundle.image
    canvas[:, w:] = PANEL_BG
    frame = canvas[:, :w]

    if output.refined is not None and registry.has_name("sidewalk"):
        sidewalk = output.refined.class_mask(registry.id_of("sidewalk"))
        if sidewalk is not None and sidewalk.any():
            blend_mask(frame, sidewalk, SIDEWALK_TINT)

    for lane in output.filtered_lanes:
        draw_polyline(frame, lane.points, LANE_COLOR)

    meters_by_det = {e.detection_id: e.meters for e in output.estimates}
    for det in bundle.detections:
        color = CLASS_COLORS.get(det.class_label, (200, 200, 200))
        draw_rect(frame, det.bbox, color)
        label = det.class_label.upper()
        meters = meters_by_det.get(det.detection_id)
        if meters is not None:
            label += f" {meters:.1f}M"
        tx = int(det.bbox[0])
        ty = max(0, int(det.bbox[1]) - GLYPH_H - 2)
        draw_text(frame, tx, ty, label, color)

    _render_panel(canvas[:, w:], output)
    return canvas


def _render_panel(panel: np.ndarray, output) -> None:
    x, y = 8, 8
    draw_text(panel, x, y, "TRAFFIC LIGHT", (160, 165, 175))
    y += GLYPH_H + 4
    state = output.light_state or "off"
    swatch = LIGHT_COLORS.get(state, LIGHT_COLORS["off"])
    panel[y : y + GLYPH_H, x : x + GLYPH_H] = swatch
    draw_text(panel, x + GLYPH_H + 4, y, state.upper(), swatch)
    light_word = {"green": "PASS", "yellow": "WARNING", "red": "STOP"}.get(state)
    if light_word:
        draw_text(panel, x + GLYPH_H + 4 + text_width(state) + 6, y, light_word, swatch)
    y += GLYPH_H + 10

    draw_text(panel, x, y, "SIGNS", (160, 165, 175))
    y += GLYPH_H + 4
    signs = [m.text for m in output.messages if m.kind == "sign"]
    if not signs:
        draw_text(panel, x, y, "-", (110, 110, 115))
        y += GLYPH_H + 3
    for name in signs:
        draw_text(panel, x, y, name.upper(), (220, 220, 230))
        y += GLYPH_H + 3
    y += 7

    draw_text(panel, x, y, "NEAREST CAR", (160, 165, 175))
    y += GLYPH_H + 4
    if output.nearest_m is None:
        draw_text(panel, x, y, "-", (110, 110, 115))
    else:
        warn = any(m.kind == "proximity" for m in output.messages)
        color = (255, 90, 90) if warn else (220, 220, 230)
        draw_text(panel, x, y, f"{output.nearest_m:.1f} M", color)
