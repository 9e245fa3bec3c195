"""World simulation standing in for the robots, their sensors and navigation."""
from .arena import Arena, build_global_maps, map1_arena, map2_arena
from .patrol import gen_patrol_goal, safe_distance
from .planning import plan_path
from .scenario import populate_map1, populate_map2
from .sensor import SensorSpec, raycast, scan_to_costmap
from .world import (IntruderState, RobotState, WorldModel, check_captures, dispatch_pursuit,
                    make_map1, make_map2, step)

__all__ = [
    "Arena", "IntruderState", "RobotState", "SensorSpec", "WorldModel", "build_global_maps",
    "check_captures", "dispatch_pursuit", "gen_patrol_goal", "make_map1", "make_map2", "map1_arena",
    "map2_arena", "plan_path", "populate_map1", "populate_map2", "raycast", "safe_distance",
    "scan_to_costmap", "step",
]
