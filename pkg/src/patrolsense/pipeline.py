"""One sensor frame: every robot senses and subtracts, then detections are fused centrally."""
from __future__ import annotations

from dataclasses import dataclass, field

from .fusion import (DEFAULT_IOU_THRESHOLD, DEFAULT_ROBOT_DIAMETER, Detection, FusionConfig,
                     RobotRecord, merge_all, remove_ally_detections)
from .gridmap import GLOBAL_THRESH, LOCAL_THRESH, threshold
from .localview import LocalFrame, process_frame
from .sim.sensor import LOCAL_INFLATION, raycast, scan_to_costmap


@dataclass(frozen=True)
class DetectionConfig:
    thresh_local: int = LOCAL_THRESH
    thresh_global: int = GLOBAL_THRESH
    iou_threshold: float = DEFAULT_IOU_THRESHOLD
    robot_diameter: float = DEFAULT_ROBOT_DIAMETER
    local_inflation: float = LOCAL_INFLATION
    min_blob_cells: int = 1

    @property
    def fusion(self) -> FusionConfig:
        return FusionConfig(self.iou_threshold, self.robot_diameter)


@dataclass
class FrameOutput:
    index: int
    frames: list = field(default_factory=list)
    roster: list = field(default_factory=list)
    cleaned: list = field(default_factory=list)
    fused: list = field(default_factory=list)


def sense(world, robot, cfg: DetectionConfig) -> LocalFrame:
    spec = world.sensor
    scan = raycast(world, robot.pose, spec, exclude=robot.id)
    side = spec.window_cells(world.resolution)
    costmap = scan_to_costmap(scan, robot.pose, (side, side), cfg.local_inflation, world.prior,
                              spec.max_range, spec.bearings)
    A = threshold(costmap, cfg.thresh_local)
    return process_frame(A, world.inflated_prior, robot.xy, robot.id, cfg.min_blob_cells)


def run_frame(world, cfg: DetectionConfig, index: int) -> FrameOutput:
    frames = [sense(world, r, cfg) for r in world.robots]
    roster = [RobotRecord(r.id, r.xy, tuple(Detection(b, r.id, index) for b in f.boxes))
              for r, f in zip(world.robots, frames)]
    cleaned = remove_ally_detections(roster, cfg.fusion, world.prior)
    fused = merge_all(cleaned, cfg.iou_threshold) if cleaned else []
    return FrameOutput(index, frames, roster, cleaned, fused)
