"""Central fusion of per-robot detections.

Every robot reports boxes in the shared global grid frame. Boxes that match a
teammate's own footprint are dropped, then the per-robot lists are merged
pairwise down a divide-and-conquer tree so duplicate sightings of one intruder
collapse to the largest box.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

from .errors import InvalidParameterError, OffMapError
from .gridmap import world_to_grid
from .localview import BBox

DEFAULT_IOU_THRESHOLD = 0.3
DEFAULT_ROBOT_DIAMETER = 0.21


@dataclass(frozen=True)
class Detection:
    box: BBox
    source_robot: int
    frame: int = 0


@dataclass(frozen=True)
class RobotRecord:
    id: int
    pose: tuple[float, float]
    detections: tuple = field(default_factory=tuple)


@dataclass(frozen=True)
class FusionConfig:
    iou_threshold: float = DEFAULT_IOU_THRESHOLD
    robot_diameter: float = DEFAULT_ROBOT_DIAMETER

    def __post_init__(self):
        if not 0 < self.iou_threshold <= 1:
            raise InvalidParameterError(f"iou threshold must be in (0, 1], got {self.iou_threshold}")
        if not self.robot_diameter > 0:
            raise InvalidParameterError("robot diameter must be > 0")


def _box(b):
    return b.box if isinstance(b, Detection) else b


def iou(b1, b2) -> float:
    """Intersection over union of two boxes (or detections)."""
    b1, b2 = _box(b1), _box(b2)
    inter = b1.intersection_area(b2)
    if inter == 0:
        return 0.0
    return inter / (b1.area + b2.area - inter)


def ally_bbox(pose, diameter: float, grid) -> BBox:
    """Square box of ``ceil(diameter / resolution)`` cells centred on the robot's cell."""
    if not diameter > 0:
        raise InvalidParameterError("robot diameter must be > 0")
    c = world_to_grid(pose, grid)
    if not grid.contains(c):
        raise OffMapError(f"pose {tuple(pose)} maps to cell {tuple(c)} outside the grid")
    side = max(1, math.ceil(diameter / grid.resolution - 1e-9))
    x1 = c.x - side // 2
    y1 = c.y - side // 2
    return BBox(x1, y1, x1 + side, y1 + side)


def remove_ally_detections(roster: Sequence[RobotRecord], cfg: FusionConfig, grid) -> list[RobotRecord]:
    """Drop, per ordered pair (ally, observer), the observer's first detection of that ally."""
    dets = [list(r.detections) for r in roster]
    for i, ally in enumerate(roster):
        b = ally_bbox(ally.pose, cfg.robot_diameter, grid)
        for j in range(len(roster)):
            if j == i:
                continue
            snapshot = dets[j]
            hit = next((k for k, det in enumerate(snapshot) if iou(b, det) >= cfg.iou_threshold), None)
            if hit is not None:
                del dets[j][hit]
    return [replace(r, detections=tuple(d)) for r, d in zip(roster, dets)]


def fuse_detections(S1: Sequence[Detection], S2: Sequence[Detection], t: float) -> list[Detection]:
    """Union of two detection lists where boxes with IoU >= ``t`` count as equal.

    The result starts as ``S2``; each element of ``S1`` either replaces its
    first match in ``S2`` (only when strictly larger) or is appended.
    """
    S = list(S2)
    for i in S1:
        for idx, j in enumerate(S2):
            if iou(i, j) >= t:
                if _box(i).area > _box(j).area:
                    S[idx] = i
                break
        else:
            S.append(i)
    return S


def merge_all(roster: Sequence[RobotRecord], t: float) -> list[Detection]:
    """Fuse all robots' lists by recursive halving; the right half is passed first."""
    if not roster:
        raise InvalidParameterError("cannot merge an empty roster")

    def doc(lo, hi):
        if lo == hi:
            return list(roster[lo].detections)
        q = (lo + hi) // 2
        left = doc(lo, q)
        right = doc(q + 1, hi)
        return fuse_detections(right, left, t)

    return doc(0, len(roster) - 1)


def combine_tree(n: int):
    """Nested tuples of 0-based robot indices in the order ``merge_all`` combines them."""
    if n < 1:
        raise InvalidParameterError("need at least one robot")

    def build(lo, hi):
        if lo == hi:
            return lo
        q = (lo + hi) // 2
        return (build(lo, q), build(q + 1, hi))

    return build(0, n - 1)
