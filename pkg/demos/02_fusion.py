"""Three robots look at each other and at one intruder.

Each robot reports its two teammates plus the intruder. Ally removal drops
the teammate boxes, then the divide-and-conquer merge collapses the three
intruder sightings into the largest one.
"""
import numpy as np

from patrolsense.fusion import (Detection, FusionConfig, RobotRecord, ally_bbox, combine_tree,
                                merge_all, remove_ally_detections)
from patrolsense.gridmap import BinaryGrid
from patrolsense.localview import BBox

grid = BinaryGrid(np.full((200, 200), 255, np.uint8), 0.05)
poses = [(2.0, 2.0), (3.0, 2.0), (2.5, 3.0)]
sightings = [BBox(45, 50, 51, 55), BBox(46, 50, 52, 56), BBox(45, 51, 51, 56)]

roster = []
for j, pose in enumerate(poses):
    dets = [Detection(ally_bbox(p, 0.21, grid), j) for i, p in enumerate(poses) if i != j]
    dets.append(Detection(sightings[j], j))
    roster.append(RobotRecord(j, pose, tuple(dets)))
    print(f"robot {j} reports", [d.box.as_tuple() for d in dets])

cleaned = remove_ally_detections(roster, FusionConfig(), grid)
for r in cleaned:
    print(f"robot {r.id} after ally removal", [d.box.as_tuple() for d in r.detections])

print("merge order:", combine_tree(len(cleaned)))
fused = merge_all(cleaned, 0.3)
print("fused:", [(d.box.as_tuple(), d.source_robot) for d in fused])
