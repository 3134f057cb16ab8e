"""Interchange file formats, all bit-exact and dependency-free.

- depth: "DPTH" magic, version 0x01, u32le width/height, float32le pixels
  row-major; a stored zero means invalid.
- segmentation and mask grids: binary PGM (P5, maxval 255), pixel = class id.
- detections: one JSON object per line (class, score, bbox, optional
  light_state).
- lanes: one JSON document listing instances of [x, y] points.
- rendered frames and camera images: binary PPM (P6).
- everything JSON is written canonically: sorted keys, 6 significant digits
  for floats, '\\n' at end, so identical state produces identical bytes.

Every reader validates strictly and raises FormatError naming the file,
the byte offset and the violated rule.
"""

from __future__ import annotations

import math
import struct
from pathlib import Path

import numpy as np

from .errors import FormatError
from .types import ClassRegistry, Detection, LaneInstance

DEPTH_MAGIC = b"DPTH"
DEPTH_VERSION = 1


# ---------------------------------------------------------------- canonical JSON

def _format_float(v: float) -> str:
    if math.isnan(v) or math.isinf(v):
        raise ValueError("non-finite floats are not representable in JSON output")
    if v == int(v) and abs(v) < 1e15:
        return f"{int(v)}.0"
    return format(v, ".6g")


def canonical_json(obj) -> str:
    """Deterministic JSON: sorted keys, fixed float formatting."""
    out: list[str] = []
    _emit(obj, out)
    return "".join(out)


def _emit(obj, out: list[str]) -> None:
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(_format_float(float(obj)))
    elif isinstance(obj, str):
        out.append(_quote(obj))
    elif isinstance(obj, (list, tuple, np.ndarray)):
        out.append("[")
        items = list(obj)
        for i, item in enumerate(items):
            if i:
                out.append(", ")
            _emit(item, out)
        out.append("]")
    elif isinstance(obj, dict):
        out.append("{")
        for i, key in enumerate(sorted(obj)):
            if i:
                out.append(", ")
            if not isinstance(key, str):
                raise ValueError(f"JSON object keys must be strings, got {key!r}")
            out.append(_quote(key))
            out.append(": ")
            _emit(obj[key], out)
        out.append("}")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__} to JSON")


_ESCAPES = {'"': '\\"', "\\": "\\\\", "\n": "\\n", "\r": "\\r", "\t": "\\t"}


def _quote(s: str) -> str:
    parts = ['"']
    for ch in s:
        if ch in _ESCAPES:
            parts.append(_ESCAPES[ch])
        elif ord(ch) < 0x20:
            parts.append(f"\\u{ord(ch):04x}")
        else:
            parts.append(ch)
    parts.append('"')
    return "".join(parts)


# ---------------------------------------------------------------------- depth

def write_depth(path, depth: np.ndarray) -> None:
    arr = np.asarray(depth, dtype=np.float32)
    if arr.ndim != 2:
        raise ValueError(f"depth must be 2-D, got shape {arr.shape}")
    h, w = arr.shape
    with open(path, "wb") as fh:
        fh.write(DEPTH_MAGIC)
        fh.write(bytes([DEPTH_VERSION]))
        fh.write(struct.pack("<II", w, h))
        fh.write(arr.astype("<f4").tobytes())


def read_depth(path) -> np.ndarray:
    path = Path(path)
    try:
        blob = path.read_bytes()
    except FileNotFoundError:
        raise FormatError(path, "missing mandatory file") from None
    if len(blob) < 4 or blob[:4] != DEPTH_MAGIC:
        raise FormatError(path, "magic mismatch: expected 'DPTH'", offset=0)
    if len(blob) < 5 or blob[4] != DEPTH_VERSION:
        raise FormatError(
            path, f"unsupported depth format version (expected {DEPTH_VERSION})", offset=4
        )
    if len(blob) < 13:
        raise FormatError(path, "truncated header: need width and height", offset=5)
    w, h = struct.unpack_from("<II", blob, 5)
    if w == 0 or h == 0:
        raise FormatError(path, f"dimensions must be positive, got {w}x{h}", offset=5)
    expected = 13 + 4 * w * h
    if len(blob) != expected:
        raise FormatError(
            path,
            f"payload size mismatch: expected {expected} bytes for {w}x{h} "
            f"float32 grid, got {len(blob)}",
            offset=min(len(blob), expected),
        )
    return np.frombuffer(blob, dtype="<f4", offset=13).reshape(h, w).copy()


# ------------------------------------------------------------------- PGM / PPM

def write_pgm(path, grid: np.ndarray) -> None:
    arr = np.asarray(grid, dtype=np.uint8)
    if arr.ndim != 2:
        raise ValueError(f"PGM grid must be 2-D, got shape {arr.shape}")
    h, w = arr.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(arr.tobytes())


def _parse_netpbm_header(path, blob: bytes, magic: bytes):
    if blob[:2] != magic:
        raise FormatError(
            path, f"magic mismatch: expected '{magic.decode()}'", offset=0
        )
    pos = 2
    fields = []
    while len(fields) < 3:
        while pos < len(blob) and blob[pos : pos + 1].isspace():
            pos += 1
        if pos < len(blob) and blob[pos : pos + 1] == b"#":
            while pos < len(blob) and blob[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(blob) and not blob[pos : pos + 1].isspace():
            pos += 1
        token = blob[start:pos]
        if not token.isdigit():
            raise FormatError(
                path, "header token must be a decimal integer", offset=start
            )
        fields.append(int(token))
    if pos >= len(blob) or not blob[pos : pos + 1].isspace():
        raise FormatError(path, "missing whitespace after header", offset=pos)
    pos += 1
    w, h, maxval = fields
    if w == 0 or h == 0:
        raise FormatError(path, f"dimensions must be positive, got {w}x{h}", offset=2)
    if maxval != 255:
        raise FormatError(path, f"maxval must be 255, got {maxval}", offset=2)
    return w, h, pos


def read_pgm(path) -> np.ndarray:
    path = Path(path)
    try:
        blob = path.read_bytes()
    except FileNotFoundError:
        raise FormatError(path, "missing mandatory file") from None
    w, h, pos = _parse_netpbm_header(path, blob, b"P5")
    expected = pos + w * h
    if len(blob) != expected:
        raise FormatError(
            path,
            f"payload size mismatch: expected {expected} bytes, got {len(blob)}",
            offset=min(len(blob), expected),
        )
    return np.frombuffer(blob, dtype=np.uint8, offset=pos).reshape(h, w).copy()


def write_ppm(path, image: np.ndarray) -> None:
    arr = np.asarray(image, dtype=np.uint8)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"PPM image must be (H, W, 3), got shape {arr.shape}")
    h, w = arr.shape[:2]
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(arr.tobytes())


def read_ppm(path) -> np.ndarray:
    path = Path(path)
    try:
        blob = path.read_bytes()
    except FileNotFoundError:
        raise FormatError(path, "missing mandatory file") from None
    w, h, pos = _parse_netpbm_header(path, blob, b"P6")
    expected = pos + 3 * w * h
    if len(blob) != expected:
        raise FormatError(
            path,
            f"payload size mismatch: expected {expected} bytes, got {len(blob)}",
            offset=min(len(blob), expected),
        )
    return np.frombuffer(blob, dtype=np.uint8, offset=pos).reshape(h, w, 3).copy()


# ------------------------------------------------------------------ detections

def write_detections(path, detections: list[Detection]) -> None:
    lines = []
    for det in detections:
        rec = {
            "class": det.class_label,
            "score": float(det.score),
            "bbox": [float(v) for v in det.bbox],
        }
        if det.light_state is not None:
            rec["light_state"] = det.light_state
        lines.append(canonical_json(rec))
    Path(path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")


def read_detections(path, registry: ClassRegistry | None = None) -> list[Detection]:
    import json

    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise FormatError(path, "missing mandatory file") from None
    detections = []
    offset = 0
    for lineno, line in enumerate(text.splitlines()):
        if line.strip():
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(
                    path, f"line {lineno + 1} is not valid JSON: {exc.msg}",
                    offset=offset + exc.pos,
                ) from None
            det = _detection_from_record(path, rec, lineno, offset, registry)
            detections.append(det)
        offset += len(line.encode("utf-8")) + 1
    return detections


def _detection_from_record(path, rec, lineno, offset, registry) -> Detection:
    def fail(rule):
        raise FormatError(path, f"line {lineno + 1}: {rule}", offset=offset)

    if not isinstance(rec, dict):
        fail("detection record must be a JSON object")
    missing = {"class", "score", "bbox"} - set(rec)
    if missing:
        fail(f"detection record missing fields {sorted(missing)}")
    unknown = set(rec) - {"class", "score", "bbox", "light_state"}
    if unknown:
        fail(f"unknown detection fields {sorted(unknown)}")
    label = rec["class"]
    if not isinstance(label, str):
        fail("'class' must be a string")
    if registry is not None and not registry.has_name(label):
        fail(f"unregistered class name {label!r}")
    score = rec["score"]
    if not isinstance(score, (int, float)) or not (0.0 <= float(score) <= 1.0):
        fail(f"'score' must be a number in [0, 1], got {score!r}")
    bbox = rec["bbox"]
    if (
        not isinstance(bbox, list)
        or len(bbox) != 4
        or not all(isinstance(v, (int, float)) for v in bbox)
    ):
        fail("'bbox' must be a list of four numbers [x, y, w, h]")
    if bbox[2] <= 0 or bbox[3] <= 0:
        fail(f"bbox width and height must be positive, got {bbox}")
    light = rec.get("light_state")
    if light is not None and light not in ("red", "yellow", "green", "off"):
        fail(f"light_state must be one of red/yellow/green/off, got {light!r}")
    return Detection(
        detection_id=lineno,
        class_label=label,
        score=float(score),
        bbox=tuple(float(v) for v in bbox),
        light_state=light,
    )


# ----------------------------------------------------------------------- lanes

def write_lanes(path, lanes: list[LaneInstance]) -> None:
    doc = {
        "instances": [
            {"id": int(lane.instance_id), "points": [[int(x), int(y)] for x, y in lane.points]}
            for lane in lanes
        ]
    }
    Path(path).write_text(canonical_json(doc) + "\n", encoding="utf-8")


def read_lanes(path) -> list[LaneInstance]:
    import json

    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise FormatError(path, "missing mandatory file") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(path, f"not valid JSON: {exc.msg}", offset=exc.pos) from None
    if not isinstance(doc, dict) or "instances" not in doc:
        raise FormatError(path, "lane document must be an object with 'instances'")
    lanes = []
    for i, inst in enumerate(doc["instances"]):
        if not isinstance(inst, dict) or "points" not in inst:
            raise FormatError(path, f"instance {i} must be an object with 'points'")
        pts = inst["points"]
        if not isinstance(pts, list) or any(
            not isinstance(p, list) or len(p) != 2 for p in pts
        ):
            raise FormatError(path, f"instance {i} points must be [x, y] pairs")
        if len(pts) < 2:
            raise FormatError(path, f"instance {i} needs at least 2 points, got {len(pts)}")
        lanes.append(
            LaneInstance(
                instance_id=int(inst.get("id", i)),
                points=np.array(pts, dtype=np.int64),
            )
        )
    return lanes


# ------------------------------------------------------------------- documents

def write_json_doc(path, doc) -> None:
    Path(path).write_text(canonical_json(doc) + "\n", encoding="utf-8")


def read_json_doc(path):
    import json

    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise FormatError(path, "missing mandatory file") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(path, f"not valid JSON: {exc.msg}", offset=exc.pos) from None
