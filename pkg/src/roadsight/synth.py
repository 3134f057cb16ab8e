"""Deterministic synthetic street scenes with exact ground truth.

A pinhole camera looks down +z over a planar road (world y = 0, x to the
right, y up). Box-shaped objects sit on or above the road. Every pixel is
ray-cast, so the emitted depth map (radial distance in meters), class map,
detections (tight bounds of each object's visible pixels), projected lane
polylines and per-object nearest-visible-point distances are mutually
consistent by construction.

Randomness comes from a counter-based splitmix64 generator implemented
here, so identical seeds reproduce identical scenes on any platform:

    state_i = seed + (i + 1) * 0x9E3779B97F4A7C15   (mod 2**64)
    out_i   = mix(state_i)      # xor-shift / multiply finalizer
    uniform = ((out_i >> 11) + 1) * 2**-53           in (0, 1]
    normals = Box-Muller on consecutive uniform pairs

Injected measurement noise is a smooth multiplicative Gaussian field
(independent normals on a coarse knot grid, bilinearly upsampled), which
mimics the spatially correlated error of monocular depth regressors.
White per-pixel noise would instead feed the 3x3 min-pool an order
statistic roughly 1.5 sigma below the mean, a bias no downstream stage can
undo.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import SceneSpecError
from .types import ClassRegistry, Detection, LaneInstance

_MASK64 = np.uint64(0xFFFFFFFFFFFFFFFF)
_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)

# flat display colors per class name (plus one per light state)
SCENE_COLORS = {
    "background": (40, 40, 45),
    "road": (95, 95, 100),
    "sidewalk": (165, 160, 150),
    "car": (40, 70, 170),
    "bus": (160, 80, 40),
    "person": (200, 140, 90),
    "traffic_sign": (190, 190, 210),
    "light_red": (230, 30, 30),
    "light_yellow": (240, 205, 40),
    "light_green": (40, 205, 70),
    "light_off": (25, 25, 25),
}


class PortableRng:
    """Counter-based splitmix64; see module docstring for the algorithm."""

    def __init__(self, seed: int):
        self._seed = np.uint64(seed & 0xFFFFFFFFFFFFFFFF)
        self._counter = 0

    def _raw(self, n: int) -> np.ndarray:
        idx = np.arange(self._counter + 1, self._counter + n + 1, dtype=np.uint64)
        self._counter += n
        z = (self._seed + idx * _GAMMA) & _MASK64
        z = (z ^ (z >> np.uint64(30))) * _MIX1 & _MASK64
        z = (z ^ (z >> np.uint64(27))) * _MIX2 & _MASK64
        return z ^ (z >> np.uint64(31))

    def uniforms(self, n: int) -> np.ndarray:
        """n floats in (0, 1]."""
        return ((self._raw(n) >> np.uint64(11)).astype(np.float64) + 1.0) * 2.0**-53

    def normals(self, n: int) -> np.ndarray:
        m = (n + 1) // 2
        u1 = self.uniforms(m)
        u2 = self.uniforms(m)
        r = np.sqrt(-2.0 * np.log(u1))
        theta = 2.0 * math.pi * u2
        out = np.concatenate([r * np.cos(theta), r * np.sin(theta)])
        return out[:n]

    def choose(self, n: int, k: int) -> np.ndarray:
        """k distinct indices from range(n), partial Fisher-Yates order."""
        if k > n:
            raise ValueError(f"cannot choose {k} from {n}")
        idx = np.arange(n)
        u = self.uniforms(k)
        for i in range(k):
            j = i + int(u[i] * (n - i)) % max(1, n - i)
            idx[i], idx[j] = idx[j], idx[i]
        return idx[:k].copy()

    def randint(self, lo: int, hi: int) -> int:
        """Integer in [lo, hi)."""
        return lo + int(self.uniforms(1)[0] * (hi - lo)) % max(1, hi - lo)


@dataclass(frozen=True)
class SceneObject:
    class_name: str
    center: tuple[float, float, float]  # (x, y, z) meters, y up from road
    size: tuple[float, float, float]    # (w, h, d) meters
    light_state: str | None = None      # traffic lights only


@dataclass(frozen=True)
class NoiseSpec:
    sigma_frac: float = 0.0
    outlier_frac: float = 0.0
    knot_px: int = 8


@dataclass(frozen=True)
class SceneSpec:
    seed: int
    width: int = 640
    height: int = 360
    focal_px: float = 600.0
    camera_height: float = 1.1
    road_width: float = 7.0
    sidewalk_width: float = 2.0
    lane_offsets: tuple[float, ...] = (-1.75, 1.75)
    lane_z_range: tuple[float, float] = (4.0, 60.0)
    far_plane: float = 120.0
    objects: tuple[SceneObject, ...] = ()
    noise: NoiseSpec = field(default_factory=NoiseSpec)

    @property
    def cx(self) -> float:
        return self.width / 2.0

    @property
    def cy(self) -> float:
        return self.height / 2.0


@dataclass
class RenderedScene:
    spec: SceneSpec
    depth: np.ndarray                 # (H, W) float32 radial meters, 0 = invalid
    seg: np.ndarray                   # (H, W) uint8 class ids
    image: np.ndarray                 # (H, W, 3) uint8 flat colors
    detections: list[Detection]
    lanes: list[LaneInstance]
    ground_truth: list[dict]          # per visible object: class, bbox, distance_m
    lane_strips: np.ndarray           # (H, W) uint8, strip index 1..n-1, 0 = none
    background_depth: np.ndarray      # (H, W) float32 plate without objects


def _validate(spec: SceneSpec) -> None:
    if spec.width < 16 or spec.height < 16:
        raise SceneSpecError(f"frame too small: {spec.width}x{spec.height}")
    for i, obj in enumerate(spec.objects):
        _, _, z = obj.center
        _, _, d = obj.size
        if z - d / 2.0 <= 0.5:
            raise SceneSpecError(
                f"object {i} ({obj.class_name}) crosses the camera near plane: "
                f"z={z} depth={d}"
            )
        if min(obj.size) <= 0:
            raise SceneSpecError(f"object {i} has non-positive size {obj.size}")


def render_scene(spec: SceneSpec, registry: ClassRegistry | None = None) -> RenderedScene:
    """Ray-cast the scene; apply spec.noise to the depth map if non-zero."""
    _validate(spec)
    registry = registry or ClassRegistry()
    H, W = spec.height, spec.width
    f = spec.focal_px
    cam_h = spec.camera_height

    uu, vv = np.meshgrid(np.arange(W, dtype=np.float64), np.arange(H, dtype=np.float64))
    dx = (uu - spec.cx) / f
    dy = (spec.cy - vv) / f
    dnorm = np.sqrt(dx * dx + dy * dy + 1.0)

    # ground plane (road + sidewalks)
    tbuf = np.full((H, W), np.inf)
    seg = np.full((H, W), registry.id_of("background"), dtype=np.uint8)
    objbuf = np.full((H, W), -1, dtype=np.int32)
    down = dy < 0
    t_ground = np.full((H, W), np.inf)
    t_ground[down] = cam_h / -dy[down]
    gx = np.zeros((H, W))
    gx[down] = t_ground[down] * dx[down]
    on_ground = down & (t_ground > 0.5) & (t_ground <= spec.far_plane)
    half_road = spec.road_width / 2.0
    road_hit = on_ground & (np.abs(gx) <= half_road)
    walk_hit = on_ground & ~road_hit & (np.abs(gx) <= half_road + spec.sidewalk_width)
    tbuf[road_hit | walk_hit] = t_ground[road_hit | walk_hit]
    seg[road_hit] = registry.id_of("road")
    seg[walk_hit] = registry.id_of("sidewalk")

    background_t = tbuf.copy()

    # boxes, nearest hit wins
    origin = np.array([0.0, cam_h, 0.0])
    dirs = (dx, dy, np.ones_like(dx))
    for i, obj in enumerate(spec.objects):
        ox, oy, oz = obj.center
        w, h, d = obj.size
        lo = (ox - w / 2.0, oy - h / 2.0, oz - d / 2.0)
        hi = (ox + w / 2.0, oy + h / 2.0, oz + d / 2.0)
        tn = np.full((H, W), -np.inf)
        tf = np.full((H, W), np.inf)
        for axis in range(3):
            da = dirs[axis]
            with np.errstate(divide="ignore", invalid="ignore"):
                t1 = (lo[axis] - origin[axis]) / da
                t2 = (hi[axis] - origin[axis]) / da
            near = np.fmin(t1, t2)
            far = np.fmax(t1, t2)
            # rays parallel to the slab hit it only if the origin is inside
            parallel = da == 0
            inside = (origin[axis] >= lo[axis]) & (origin[axis] <= hi[axis])
            near = np.where(parallel, np.where(inside, -np.inf, np.inf), near)
            far = np.where(parallel, np.where(inside, np.inf, -np.inf), far)
            tn = np.maximum(tn, near)
            tf = np.minimum(tf, far)
        hit = (tf >= tn) & (tn > 0.5) & (tn < tbuf)
        tbuf[hit] = tn[hit]
        seg[hit] = registry.id_of(obj.class_name)
        objbuf[hit] = i

    valid = np.isfinite(tbuf)
    depth = np.zeros((H, W), dtype=np.float32)
    depth[valid] = (tbuf[valid] * dnorm[valid]).astype(np.float32)
    background_depth = np.zeros((H, W), dtype=np.float32)
    bg_valid = np.isfinite(background_t)
    background_depth[bg_valid] = (background_t[bg_valid] * dnorm[bg_valid]).astype(
        np.float32
    )

    image = np.zeros((H, W, 3), dtype=np.uint8)
    image[:, :] = SCENE_COLORS["background"]
    image[seg == registry.id_of("road")] = SCENE_COLORS["road"]
    image[seg == registry.id_of("sidewalk")] = SCENE_COLORS["sidewalk"]
    for i, obj in enumerate(spec.objects):
        if obj.class_name == "traffic_light":
            color = SCENE_COLORS[f"light_{obj.light_state or 'off'}"]
        else:
            color = SCENE_COLORS.get(obj.class_name, (120, 120, 120))
        image[objbuf == i] = color

    detections: list[Detection] = []
    ground_truth: list[dict] = []
    det_id = 0
    for i, obj in enumerate(spec.objects):
        mask = objbuf == i
        if not mask.any():
            continue
        ys, xs = np.nonzero(mask)
        bbox = (
            float(xs.min()),
            float(ys.min()),
            float(xs.max() - xs.min() + 1),
            float(ys.max() - ys.min() + 1),
        )
        detections.append(
            Detection(
                detection_id=det_id,
                class_label=obj.class_name,
                score=round(0.9 - 0.01 * (det_id % 10), 2),
                bbox=bbox,
            )
        )
        ground_truth.append(
            {
                "object_index": i,
                "class": obj.class_name,
                "bbox": list(bbox),
                "distance_m": float(depth[mask].min()),
            }
        )
        det_id += 1

    lanes = _project_lanes(spec)
    lane_strips = _lane_strip_map(spec)

    if spec.noise.sigma_frac > 0 or spec.noise.outlier_frac > 0:
        depth = inject_noise(
            depth,
            spec.noise,
            spec.seed,
            object_mask=objbuf >= 0,
            background_depth=background_depth,
        )

    return RenderedScene(
        spec=spec,
        depth=depth,
        seg=seg,
        image=image,
        detections=detections,
        lanes=lanes,
        ground_truth=ground_truth,
        lane_strips=lane_strips,
        background_depth=background_depth,
    )


def _lane_rows(spec: SceneSpec) -> np.ndarray:
    """Integer image rows covered by the lane z-range, nearest row last."""
    f, cam_h = spec.focal_px, spec.camera_height
    z_near, z_far = spec.lane_z_range
    v_far = int(math.ceil(spec.cy + f * cam_h / z_far))
    v_near = int(math.floor(spec.cy + f * cam_h / z_near))
    v_far = max(v_far, 0)
    v_near = min(v_near, spec.height - 1)
    return np.arange(v_far, v_near + 1)


def _lane_line_x(spec: SceneSpec, offset: float, rows: np.ndarray) -> np.ndarray:
    """Column position of the lane line at each image row (exact, float)."""
    return spec.cx + offset * (rows - spec.cy) / spec.camera_height


def _project_lanes(spec: SceneSpec, row_step: int = 3) -> list[LaneInstance]:
    rows = _lane_rows(spec)[::row_step]
    lanes = []
    for k, offset in enumerate(spec.lane_offsets):
        xs = np.round(_lane_line_x(spec, offset, rows)).astype(np.int64)
        ok = (xs >= 0) & (xs < spec.width)
        pts = np.stack([xs[ok], rows[ok]], axis=1)
        if len(pts) >= 2:
            lanes.append(LaneInstance(instance_id=k, points=pts))
    return lanes


def _lane_strip_map(spec: SceneSpec) -> np.ndarray:
    """Analytic ground-truth strips between adjacent lane lines.

    Rebuilt per row from the exact projection formula, independently of the
    polyline-interpolation route the pipeline uses.
    """
    strips = np.zeros((spec.height, spec.width), dtype=np.uint8)
    offsets = sorted(spec.lane_offsets)
    if len(offsets) < 2:
        return strips
    rows = _lane_rows(spec)
    cols = np.arange(spec.width, dtype=np.float64)
    band = strips[rows]
    for idx in range(len(offsets) - 1):
        left = _lane_line_x(spec, offsets[idx], rows)
        right = _lane_line_x(spec, offsets[idx + 1], rows)
        between = (cols[None, :] > left[:, None]) & (cols[None, :] < right[:, None])
        band[between] = idx + 1
    strips[rows] = band
    return strips


def inject_noise(
    depth: np.ndarray,
    noise: NoiseSpec,
    seed: int,
    object_mask: np.ndarray | None = None,
    background_depth: np.ndarray | None = None,
    far_default: float = 150.0,
) -> np.ndarray:
    """Multiplicative smooth Gaussian noise plus background-depth outliers.

    The Gaussian factor (1 + sigma_frac * g) applies to every valid pixel.
    Exactly round(outlier_frac * n) of the object-mask pixels are replaced
    by the background plate value behind them (or ``far_default`` where the
    background is invalid). Fully deterministic for a given seed.
    """
    if not (0.0 <= noise.sigma_frac < 1.0) or not (0.0 <= noise.outlier_frac < 1.0):
        raise SceneSpecError(f"noise fractions must be in [0, 1): {noise}")
    rng = PortableRng(seed)
    out = depth.astype(np.float64)
    valid = out > 0
    if noise.sigma_frac > 0:
        h, w = out.shape
        knot = max(1, int(noise.knot_px))
        gh, gw = h // knot + 2, w // knot + 2
        g = rng.normals(gh * gw).reshape(gh, gw)
        ys = np.arange(h, dtype=np.float64) / knot
        xs = np.arange(w, dtype=np.float64) / knot
        y0 = ys.astype(np.int64)
        x0 = xs.astype(np.int64)
        fy = (ys - y0)[:, None]
        fx = (xs - x0)[None, :]
        fld = (
            g[y0][:, x0] * (1 - fy) * (1 - fx)
            + g[y0 + 1][:, x0] * fy * (1 - fx)
            + g[y0][:, x0 + 1] * (1 - fy) * fx
            + g[y0 + 1][:, x0 + 1] * fy * fx
        )
        out[valid] = out[valid] * (1.0 + noise.sigma_frac * fld[valid])
    if noise.outlier_frac > 0:
        mask = valid if object_mask is None else (np.asarray(object_mask, bool) & valid)
        ys, xs = np.nonzero(mask)
        n = int(round(noise.outlier_frac * len(ys)))
        if n > 0:
            picked = rng.choose(len(ys), n)
            py, px = ys[picked], xs[picked]
            if background_depth is not None:
                repl = background_depth[py, px].astype(np.float64)
                repl = np.where(repl > 0, repl, far_default)
            else:
                repl = np.full(n, far_default)
            out[py, px] = repl
    return out.astype(np.float32)


def sample_scene(seed: int) -> SceneSpec:
    """Deterministic random scene in the regime the oracle is built for.

    Vehicles sit near the camera axis with size scaled to their distance so
    the nearest-visible-point ground truth stays within a fraction of a
    percent of the depth the measurement cascade reports; a roadside light
    and sign exercise the message paths.
    """
    rng = PortableRng(seed * 1000003 + 17)
    n_vehicles = 1 + rng.randint(0, 3)
    objects = []
    zs: list[float] = []
    for _ in range(n_vehicles):
        for _attempt in range(20):
            z = 5.0 + rng.uniforms(1)[0] * 55.0
            if all(abs(z - prev) > 4.0 for prev in zs):
                break
        zs.append(z)
        w = min(1.9, max(0.8, 0.18 * z))
        h = 0.9 * w
        d = 2.0 * w
        x = (rng.uniforms(1)[0] * 2.0 - 1.0) * 0.06 * z
        cls = "car" if rng.uniforms(1)[0] < 0.8 else "bus"
        objects.append(SceneObject(cls, (x, h / 2.0, z), (w, h, d)))
    cam_h = 0.55 * min(o.size[1] for o in objects)
    states = ("red", "yellow", "green", "off")
    if rng.uniforms(1)[0] < 0.7:
        z = 12.0 + rng.uniforms(1)[0] * 20.0
        objects.append(
            SceneObject(
                "traffic_light",
                (4.2, 3.2, z),
                (0.5, 1.1, 0.4),
                light_state=states[rng.randint(0, 4)],
            )
        )
    if rng.uniforms(1)[0] < 0.6:
        z = 10.0 + rng.uniforms(1)[0] * 25.0
        objects.append(SceneObject("traffic_sign", (-4.2, 2.4, z), (0.7, 0.7, 0.1)))
    three_lines = rng.uniforms(1)[0] < 0.5
    lane_offsets = (-3.5, 0.0, 3.5) if three_lines else (-1.75, 1.75)
    return SceneSpec(
        seed=seed,
        camera_height=cam_h,
        lane_offsets=lane_offsets,
        objects=tuple(objects),
    )


def with_noise(spec: SceneSpec, sigma_frac: float, outlier_frac: float) -> SceneSpec:
    return replace(spec, noise=NoiseSpec(sigma_frac=sigma_frac, outlier_frac=outlier_frac))


def write_scene(scene: RenderedScene, out_dir, frame_index: int) -> None:
    """Write one rendered scene as a frame bundle plus ground-truth annex."""
    from pathlib import Path

    from .formats import write_json_doc, write_pgm
    from .pipeline import FrameBundle, write_bundle

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_bundle(
        out_dir,
        FrameBundle(
            frame_index=frame_index,
            depth=scene.depth,
            seg=scene.seg,
            detections=scene.detections,
            lanes=scene.lanes,
            image=scene.image,
        ),
    )
    annex = {
        "frame_index": frame_index,
        "seed": scene.spec.seed,
        "camera": {
            "focal_px": scene.spec.focal_px,
            "height_m": scene.spec.camera_height,
        },
        "objects": scene.ground_truth,
    }
    write_json_doc(out_dir / f"gt_{frame_index:06d}.json", annex)
    write_pgm(out_dir / f"gtlanes_{frame_index:06d}.pgm", scene.lane_strips)


def generate_dataset(
    out_dir,
    scenes: int,
    seed: int,
    sigma_frac: float = 0.0,
    outlier_frac: float = 0.0,
) -> list[SceneSpec]:
    """Sample, render and write a sequence of scenes; returns their specs."""
    specs = []
    for i in range(scenes):
        spec = sample_scene(seed + i)
        if sigma_frac > 0 or outlier_frac > 0:
            spec = with_noise(spec, sigma_frac, outlier_frac)
        scene = render_scene(spec)
        write_scene(scene, out_dir, i)
        specs.append(spec)
    return specs
