"""Pipeline configuration: defaults, JSON loading, strict validation.

A config file is a single JSON document. Unknown keys are rejected so a
typo cannot silently fall back to a default. The path is resolved in this
order: explicit path argument, the ROADSIGHT_CONFIG environment variable,
a ``config.json`` next to the input data, built-in defaults.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, asdict
from pathlib import Path

from .errors import ConfigError
from .types import ClassRegistry, DEFAULT_CLASSES

ENV_CONFIG = "ROADSIGHT_CONFIG"


@dataclass
class LightHeuristicConfig:
    min_area_px: int = 25
    min_frac: float = 0.05
    saturation_min: float = 0.4
    value_min: float = 0.3
    hue_red: tuple = ((0.0, 20.0), (340.0, 360.0))
    hue_yellow: tuple = ((35.0, 70.0),)
    hue_green: tuple = ((80.0, 170.0),)


@dataclass
class PipelineConfig:
    classes: dict = field(default_factory=lambda: dict(DEFAULT_CLASSES))
    # road ROI
    se_radius_base: int = 5          # disc radius at se_base_width frame width
    se_base_width: int = 1280
    road_class: str = "road"
    keep_fraction: float = 0.5
    # segmentation refinement
    refine_classes: tuple = ("sidewalk", "car", "bus")
    min_area_frac: float = 0.002
    # distance cascade
    min_pool_kernel: int = 3
    avg_pool_kernels: tuple = (2, 3, 5)
    sigma_multiplier: float = 2.0
    min_points: int = 4
    depth_scale: float = 1.0
    distance_classes: tuple = ("car", "bus")
    # messages
    proximity_threshold_m: float = 10.0
    sign_classes: tuple = ("traffic_sign",)
    light: LightHeuristicConfig = field(default_factory=LightHeuristicConfig)
    # evaluation
    iou_threshold: float = 0.5
    ra_threshold: float = 0.8
    # orchestration
    max_workers: int = 1

    def registry(self) -> ClassRegistry:
        return ClassRegistry(self.classes)

    def se_radius_for_width(self, width: int) -> int:
        """Disc radius scaled proportionally to the frame width."""
        return max(1, round(self.se_radius_base * width / self.se_base_width))

    def validate(self) -> "PipelineConfig":
        if not (0.0 <= self.keep_fraction <= 1.0):
            raise ConfigError(f"keep_fraction must be in [0,1]: {self.keep_fraction}")
        if not (0.0 < self.min_area_frac < 1.0):
            raise ConfigError(f"min_area_frac must be in (0,1): {self.min_area_frac}")
        if self.se_radius_base < 1 or self.se_base_width < 1:
            raise ConfigError("se_radius_base and se_base_width must be >= 1")
        if self.min_pool_kernel < 1:
            raise ConfigError(f"min_pool_kernel must be >= 1: {self.min_pool_kernel}")
        if not self.avg_pool_kernels or any(k < 1 for k in self.avg_pool_kernels):
            raise ConfigError(f"avg_pool_kernels must be >= 1: {self.avg_pool_kernels}")
        if self.sigma_multiplier <= 0:
            raise ConfigError("sigma_multiplier must be > 0")
        if self.min_points < 1:
            raise ConfigError("min_points must be >= 1")
        if self.depth_scale <= 0:
            raise ConfigError("depth_scale must be > 0")
        if self.proximity_threshold_m <= 0:
            raise ConfigError("proximity_threshold_m must be > 0")
        if not (0.0 < self.iou_threshold < 1.0):
            raise ConfigError("iou_threshold must be in (0,1)")
        if self.max_workers < 1:
            raise ConfigError("max_workers must be >= 1")
        registry = self.registry()
        for name in (self.road_class, *self.refine_classes, *self.distance_classes):
            registry.id_of(name)  # raises ConfigError when unregistered
        return self

    def to_dict(self) -> dict:
        d = asdict(self)
        d["refine_classes"] = list(self.refine_classes)
        d["avg_pool_kernels"] = list(self.avg_pool_kernels)
        d["distance_classes"] = list(self.distance_classes)
        d["sign_classes"] = list(self.sign_classes)
        d["light"] = {
            "min_area_px": self.light.min_area_px,
            "min_frac": self.light.min_frac,
            "saturation_min": self.light.saturation_min,
            "value_min": self.light.value_min,
            "hue_red": [list(b) for b in self.light.hue_red],
            "hue_yellow": [list(b) for b in self.light.hue_yellow],
            "hue_green": [list(b) for b in self.light.hue_green],
        }
        return d


_LIGHT_KEYS = {
    "min_area_px", "min_frac", "saturation_min", "value_min",
    "hue_red", "hue_yellow", "hue_green",
}
_TOP_KEYS = {
    "classes", "se_radius_base", "se_base_width", "road_class", "keep_fraction",
    "refine_classes", "min_area_frac", "min_pool_kernel", "avg_pool_kernels",
    "sigma_multiplier", "min_points", "depth_scale", "distance_classes",
    "proximity_threshold_m", "sign_classes", "light", "iou_threshold",
    "ra_threshold", "max_workers",
}


def config_from_dict(data: dict) -> PipelineConfig:
    if not isinstance(data, dict):
        raise ConfigError(f"config root must be an object, got {type(data).__name__}")
    unknown = set(data) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    kwargs = dict(data)
    light_data = kwargs.pop("light", None)
    if light_data is not None:
        if not isinstance(light_data, dict):
            raise ConfigError("config key 'light' must be an object")
        bad = set(light_data) - _LIGHT_KEYS
        if bad:
            raise ConfigError(f"unknown light config keys: {sorted(bad)}")
        for key in ("hue_red", "hue_yellow", "hue_green"):
            if key in light_data:
                light_data[key] = tuple(tuple(b) for b in light_data[key])
        kwargs["light"] = LightHeuristicConfig(**light_data)
    for key in ("refine_classes", "avg_pool_kernels", "distance_classes", "sign_classes"):
        if key in kwargs:
            kwargs[key] = tuple(kwargs[key])
    try:
        cfg = PipelineConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"bad config structure: {exc}") from None
    return cfg.validate()


def load_config(path=None, input_dir=None) -> PipelineConfig:
    """Resolve and load configuration (see module docstring for precedence)."""
    candidates = []
    if path is not None:
        candidates.append((Path(path), True))
    env = os.environ.get(ENV_CONFIG)
    if env:
        candidates.append((Path(env), True))
    if input_dir is not None:
        candidates.append((Path(input_dir) / "config.json", False))
    for p, required in candidates:
        if not p.exists():
            if required:
                raise ConfigError(f"config file not found: {p}")
            continue
        try:
            data = json.loads(p.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {p} is not valid JSON: {exc}") from None
        return config_from_dict(data)
    return PipelineConfig().validate()


def save_config(cfg: PipelineConfig, path) -> None:
    from .formats import canonical_json

    Path(path).write_text(canonical_json(cfg.to_dict()) + "\n", encoding="utf-8")
