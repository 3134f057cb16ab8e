"""Shared domain types: class registry, detections, lane instances."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

DEFAULT_CLASSES = {
    "background": 0,
    "road": 1,
    "sidewalk": 2,
    "car": 3,
    "bus": 4,
    "person": 5,
    "traffic_light": 6,
    "traffic_sign": 7,
}


class ClassRegistry:
    """Name <-> id mapping for segmentation and detection classes.

    Ids must be unique and fit the segmentation map's 8-bit storage;
    id 0 is reserved for ``background``.
    """

    def __init__(self, classes: dict[str, int] | None = None):
        classes = dict(DEFAULT_CLASSES if classes is None else classes)
        if classes.get("background") != 0:
            raise ConfigError("class registry must map 'background' to id 0")
        ids = list(classes.values())
        if len(set(ids)) != len(ids):
            raise ConfigError(f"class registry has duplicate ids: {sorted(ids)}")
        for name, cid in classes.items():
            if not (0 <= int(cid) <= 255):
                raise ConfigError(f"class id out of range 0..255: {name}={cid}")
        self._by_name = {str(k): int(v) for k, v in classes.items()}
        self._by_id = {v: k for k, v in self._by_name.items()}

    def id_of(self, name: str) -> int:
        try:
            return self._by_name[name]
        except KeyError:
            raise ConfigError(f"unregistered class name: {name!r}") from None

    def name_of(self, class_id: int) -> str:
        try:
            return self._by_id[int(class_id)]
        except KeyError:
            raise ConfigError(f"unregistered class id: {class_id}") from None

    def has_name(self, name: str) -> bool:
        return name in self._by_name

    def has_id(self, class_id: int) -> bool:
        return int(class_id) in self._by_id

    def items(self) -> list[tuple[str, int]]:
        """(name, id) pairs sorted by id."""
        return sorted(self._by_name.items(), key=lambda kv: kv[1])

    def to_dict(self) -> dict[str, int]:
        return dict(self._by_name)


@dataclass
class Detection:
    """One detected object in pixel space.

    ``bbox`` is (x, y, w, h) with w, h > 0; ``light_state`` is an optional
    upstream-supplied traffic light state that overrides the pixel heuristic.
    """

    detection_id: int
    class_label: str
    score: float
    bbox: tuple[float, float, float, float]
    light_state: str | None = None


@dataclass
class LaneInstance:
    """Ordered point list for one detected lane line instance."""

    instance_id: int
    points: np.ndarray  # (N, 2) int array of (x, y)

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.int64).reshape(-1, 2)
