"""Populating the testbeds with robots and intruders."""
from __future__ import annotations

import math

from .world import IntruderState, RobotState, WorldModel, set_wander_goal

SPAWN_GAP = 0.6
# centre-block spawn slots for Map 2 (meters from the arena centre)
CENTER_BLOCK = [(0.0, 0.0), (0.7, 0.0), (-0.7, 0.0), (0.0, 0.7), (0.0, -0.7),
                (0.7, 0.7), (-0.7, -0.7), (0.7, -0.7), (-0.7, 0.7)]


def _occupied_points(world):
    return [r.xy for r in world.robots] + [i.xy for i in world.intruders]


def add_robot(world: WorldModel, xy, heading: float = 0.0) -> RobotState:
    robot = RobotState(len(world.robots), [float(xy[0]), float(xy[1]), heading])
    world.robots.append(robot)
    world.invalidate()
    world.log("spawn", f"r{robot.id}", *robot.xy)
    return robot


def add_intruder(world: WorldModel, xy, **kwargs) -> IntruderState:
    intr = IntruderState(len(world.intruders), [float(xy[0]), float(xy[1]), 0.0], **kwargs)
    world.intruders.append(intr)
    world.invalidate()
    world.log("spawn", f"i{intr.id}", *intr.xy)
    return intr


def populate_map1(world: WorldModel, n_robots: int, n_mobile: int = 5, n_stationary: int = 3,
                  mobile_radius: float = 0.1, box_side=(0.5, 1.0)) -> WorldModel:
    """Stationary boxes first, then robots, then wandering disc intruders, all seeded from ``world.rng``."""
    region = world.arena.interior
    for _ in range(n_stationary):
        w, l = (float(world.rng.uniform(*box_side)) for _ in range(2))
        half_diag = math.hypot(w, l) / 2
        xy = world.sample_free_point(region, half_diag + 0.5, _occupied_points(world), half_diag + SPAWN_GAP)
        add_intruder(world, xy, shape="rect", size=(w, l), mobile=False)
    for _ in range(n_robots):
        xy = world.sample_free_point(region, 0.4, _occupied_points(world), SPAWN_GAP)
        add_robot(world, xy, float(world.rng.uniform(-math.pi, math.pi)))
    for _ in range(n_mobile):
        xy = world.sample_free_point(region, 0.4, _occupied_points(world), SPAWN_GAP)
        intr = add_intruder(world, xy, radius=mobile_radius)
        set_wander_goal(world, intr)
    return world


def populate_map2(world: WorldModel, n_robots: int, n_intruders: int, intruder_radius: float = 0.1,
                  min_escape_distance: float = 12.0, min_spawn_distance: float = 4.0) -> WorldModel:
    """Robots in the centre block; intruders spawned inside with an escape point beyond a door."""
    if n_robots > len(CENTER_BLOCK):
        raise ValueError(f"at most {len(CENTER_BLOCK)} robots fit the centre block")
    for k in range(n_robots):
        add_robot(world, CENTER_BLOCK[k], 0.0)
    region = world.arena.interior
    for _ in range(n_intruders):
        while True:
            xy = world.sample_free_point(region, 0.4, _occupied_points(world), SPAWN_GAP)
            if math.hypot(*xy) < min_spawn_distance:
                continue
            exits = [e for e in world.arena.escape_points
                     if math.hypot(e[0] - xy[0], e[1] - xy[1]) >= min_escape_distance]
            if exits:
                break
        goal = exits[int(world.rng.integers(len(exits)))]
        intr = add_intruder(world, xy, radius=intruder_radius, goal=goal, escape=True)
        intr.path = world.route(intr.xy, goal)
        world.log("goal", f"i{intr.id}", *goal)
    return world
