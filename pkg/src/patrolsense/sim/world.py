"""Deterministic world model: robots, intruders, kinematics, pursuit and capture."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..errors import NoPathError
from ..gridmap import DEFAULT_RESOLUTION, BinaryGrid, disk_mask, world_to_grid
from ..localview import BBox
from . import patrol
from ..gridmap import GLOBAL_THRESH
from .arena import (GLOBAL_INFLATION, Arena, build_global_maps, disc_cells, map1_arena,
                    map2_arena, rasterize_rects)
from .planning import line_of_sight, plan_path
from .sensor import SensorSpec

ROBOT_SPEED = 0.22
INTRUDER_SPEED = 0.22
ROBOT_RADIUS = 0.105
NAV_INFLATION = 0.15
GOAL_TOLERANCE = 0.2
GOAL_STALE_AFTER = 30.0
PURSUIT_TIMEOUT = 2.0
PURSUIT_GATE = 1.0
CAPTURE_RADIUS = 0.5
DT = 0.05

PATROLLING = "patrolling"
PURSUING = "pursuing"


@dataclass
class RobotState:
    id: int
    pose: list  # [x, y, heading]
    speed_limit: float = ROBOT_SPEED
    radius: float = ROBOT_RADIUS
    patrol_goal: Optional[tuple] = None
    path: list = field(default_factory=list)
    mode: str = PATROLLING
    goal_set_at: float = 0.0
    pursuit_target: Optional[tuple] = None
    routed_to: Optional[tuple] = None
    last_seen: float = 0.0
    stationary: bool = False

    @property
    def xy(self) -> tuple[float, float]:
        return (self.pose[0], self.pose[1])


@dataclass
class IntruderState:
    id: int
    pose: list
    shape: str = "disc"  # "disc" or "rect"
    radius: float = 0.1
    size: tuple = (0.0, 0.0)  # rect width (x) and length (y)
    mobile: bool = True
    goal: Optional[tuple] = None
    escape: bool = False  # goal is an escape point rather than a wander target
    path: list = field(default_factory=list)
    speed_limit: float = INTRUDER_SPEED
    caught: bool = False
    escaped: bool = False

    @property
    def xy(self) -> tuple[float, float]:
        return (self.pose[0], self.pose[1])

    @property
    def active(self) -> bool:
        return not (self.caught or self.escaped)

    def rect(self):
        w, l = self.size
        return (self.pose[0] - w / 2, self.pose[1] - l / 2, self.pose[0] + w / 2, self.pose[1] + l / 2)


@dataclass
class WorldModel:
    arena: Arena
    prior: BinaryGrid
    inflated_prior: BinaryGrid
    robots: list = field(default_factory=list)
    intruders: list = field(default_factory=list)
    clock: float = 0.0
    steps: int = 0
    rng: np.random.Generator = field(default_factory=lambda: np.random.default_rng(0))
    sensor: SensorSpec = field(default_factory=SensorSpec)
    events: list = field(default_factory=list)
    goal_tolerance: float = GOAL_TOLERANCE
    goal_stale_after: float = GOAL_STALE_AFTER
    pursuit_timeout: float = PURSUIT_TIMEOUT
    nav_inflation: float = NAV_INFLATION
    wander_region: Optional[tuple] = None

    def __post_init__(self):
        self._static = None
        self._nav = None
        self._clearance = None
        self._occ_cache = None

    @property
    def resolution(self) -> float:
        return self.prior.resolution

    @property
    def exits(self):
        return self.arena.exits

    # -- static layers -------------------------------------------------------
    def invalidate(self):
        self._static = self._nav = self._clearance = None
        self._occ_cache = None

    @property
    def static_mask(self) -> np.ndarray:
        """Walls plus stationary intruder bodies."""
        if self._static is None:
            mask = self.prior.occupied.copy()
            rects = [i.rect() for i in self.intruders if not i.mobile and i.shape == "rect" and i.active]
            if rects:
                mask |= rasterize_rects(rects, self.prior.origin, mask.shape, self.resolution)
            for i in self.intruders:
                if not i.mobile and i.shape == "disc" and i.active:
                    r, c = disc_cells(i.pose[0], i.pose[1], i.radius, self.prior.origin,
                                      self.resolution, mask.shape)
                    mask[r, c] = True
            self._static = mask
        return self._static

    @property
    def nav_blocked(self) -> np.ndarray:
        """Cells a robot centre must avoid when planning."""
        if self._nav is None:
            from scipy import ndimage
            rc = self.nav_inflation / self.resolution
            self._nav = ndimage.binary_dilation(self.static_mask, structure=disk_mask(rc)) \
                if rc >= 1 else self.static_mask.copy()
        return self._nav

    @property
    def clearance(self) -> np.ndarray:
        if self._clearance is None:
            self._clearance = patrol.clearance_map(self.static_mask, self.resolution)
        return self._clearance

    # -- dynamic occupancy ---------------------------------------------------
    def entity_cells(self, entity):
        shape = self.prior.shape
        if isinstance(entity, IntruderState) and entity.shape == "rect":
            x0, y0, x1, y1 = entity.rect()
            mask = rasterize_rects([(x0, y0, x1, y1)], self.prior.origin, shape, self.resolution)
            return np.nonzero(mask)
        return disc_cells(entity.pose[0], entity.pose[1], entity.radius, self.prior.origin,
                          self.resolution, shape)

    def truth_box(self, intruder) -> BBox:
        rows, cols = self.entity_cells(intruder)
        return BBox(int(cols.min()), int(rows.min()), int(cols.max()) + 1, int(rows.max()) + 1)

    def occupancy(self, exclude=None) -> np.ndarray:
        """Everything a LiDAR could hit right now, minus robot ``exclude``'s own body."""
        if self._occ_cache is None or self._occ_cache[0] != self.steps:
            base = self.static_mask.copy()
            for i in self.intruders:
                if i.active and i.mobile:
                    r, c = self.entity_cells(i)
                    base[r, c] = True
            robots = {rb.id: self.entity_cells(rb) for rb in self.robots}
            self._occ_cache = (self.steps, base, robots)
        _, base, robots = self._occ_cache
        occ = base.copy()
        for rid, (r, c) in robots.items():
            if rid != exclude:
                occ[r, c] = True
        return occ

    # -- helpers ---------------------------------------------------------------
    def log(self, kind: str, entity: str, x: float, y: float):
        self.events.append((round(self.clock, 6), kind, entity, float(x), float(y)))

    def cell_to_world(self, cx: float, cy: float) -> tuple[float, float]:
        return (self.prior.origin[0] + cx * self.resolution, self.prior.origin[1] + cy * self.resolution)

    def box_centroid(self, box: BBox) -> tuple[float, float]:
        cx, cy = box.center
        return self.cell_to_world(cx, cy)

    def route(self, start, goal) -> list:
        """Waypoints from ``start`` to ``goal``; straight when the segment is clear."""
        blocked = self.nav_blocked
        if line_of_sight(blocked, self.prior.origin, self.resolution, start, goal):
            return [tuple(goal)]
        s = world_to_grid(start, self.prior)
        g = world_to_grid(goal, self.prior)
        try:
            cells = plan_path(blocked, s, g)
        except NoPathError:
            return [tuple(goal)]
        pts = [self.cell_to_world(c.x + 0.5, c.y + 0.5) for c in cells[1:-1]]
        return pts + [tuple(goal)]

    def sample_free_point(self, region, min_clearance: float, avoid=(), min_gap: float = 0.0,
                          max_tries: int = 10000):
        x0, y0, x1, y1 = region
        for _ in range(max_tries):
            x, y = self.rng.uniform(x0, x1), self.rng.uniform(y0, y1)
            cell = world_to_grid((x, y), self.prior)
            if not self.prior.contains(cell) or self.clearance[cell.y, cell.x] < min_clearance:
                continue
            if any(math.hypot(x - a[0], y - a[1]) < min_gap for a in avoid):
                continue
            return (x, y)
        from ..errors import ExhaustionError
        raise ExhaustionError(f"no free point in {region} with clearance {min_clearance}")

    def new_patrol_goal(self, robot: RobotState):
        z = patrol.safe_distance(self.arena.diagonal, len(self.robots))
        others = [r.patrol_goal for r in self.robots if r is not robot]
        goal, _ = patrol.gen_patrol_goal(robot.xy, others, self.prior, self.rng, self.arena.interior, z,
                                         clearance=self.clearance)
        robot.patrol_goal = goal
        robot.goal_set_at = self.clock
        robot.path = self.route(robot.xy, goal)
        self.log("goal", f"r{robot.id}", *goal)
        return goal


def make_map1(resolution: float = DEFAULT_RESOLUTION, seed: int = 0,
              global_inflation: float = GLOBAL_INFLATION, sensor: SensorSpec | None = None,
              thresh: int = GLOBAL_THRESH) -> WorldModel:
    """Empty Map 1 world: the 6 m enclosure on an 8 m ground plane."""
    arena = map1_arena()
    prior, inflated = build_global_maps(arena, resolution, global_inflation, thresh)
    return WorldModel(arena, prior, inflated, rng=np.random.default_rng(seed), sensor=sensor or SensorSpec(),
                      wander_region=arena.interior)


def make_map2(resolution: float = DEFAULT_RESOLUTION, seed: int = 0, door_width: float = 1.0,
              global_inflation: float = GLOBAL_INFLATION, sensor: SensorSpec | None = None,
              thresh: int = GLOBAL_THRESH) -> WorldModel:
    """Empty Map 2 world: 20 m boundary with two doors on a 24 m ground plane."""
    arena = map2_arena(door_width)
    prior, inflated = build_global_maps(arena, resolution, global_inflation, thresh)
    return WorldModel(arena, prior, inflated, rng=np.random.default_rng(seed), sensor=sensor or SensorSpec(),
                      wander_region=arena.interior)


def make_world_from_grid(prior: BinaryGrid, seed: int = 0, global_inflation: float = GLOBAL_INFLATION,
                         sensor: SensorSpec | None = None, name: str = "custom") -> WorldModel:
    """World around a loaded prior map; the whole grid (minus a margin) is patrolled."""
    from ..gridmap import inflate
    x0, y0 = prior.origin
    x1 = x0 + prior.width * prior.resolution
    y1 = y0 + prior.height * prior.resolution
    m = 2 * prior.resolution
    arena = Arena(name, (x0, y0, x1, y1), [], (x0 + m, y0 + m, x1 - m, y1 - m))
    return WorldModel(arena, prior, inflate(prior, global_inflation), rng=np.random.default_rng(seed),
                      sensor=sensor or SensorSpec(), wander_region=arena.interior)


# --------------------------------------------------------------------------
# kinematics

def _advance(world: WorldModel, entity, dt: float) -> bool:
    """Move along the waypoint queue; returns True when the queue empties."""
    budget = entity.speed_limit * dt
    x, y = entity.pose[0], entity.pose[1]
    static = world.static_mask
    while entity.path and budget > 1e-12:
        wx, wy = entity.path[0]
        d = math.hypot(wx - x, wy - y)
        if d <= budget:
            nx, ny = wx, wy
            budget -= d
            entity.path.pop(0)
        else:
            nx, ny = x + (wx - x) * budget / d, y + (wy - y) * budget / d
            budget = 0.0
        cell = world_to_grid((nx, ny), world.prior)
        if not world.prior.contains(cell) or _hits_static(world, static, entity, cell):
            entity.path.clear()
            break
        if (nx, ny) != (x, y):
            entity.pose[2] = math.atan2(ny - y, nx - x)
        x, y = nx, ny
    entity.pose[0], entity.pose[1] = x, y
    return not entity.path


def _hits_static(world, static, entity, cell) -> bool:
    if not static[cell.y, cell.x]:
        return False
    # a stationary intruder never blocks the cells of its own body
    return not (isinstance(entity, IntruderState) and not entity.mobile)


def step(world: WorldModel, dt: float = DT) -> WorldModel:
    """Advance every mobile entity by ``dt`` seconds of simulated time."""
    if not dt > 0:
        from ..errors import InvalidParameterError
        raise InvalidParameterError("dt must be > 0")
    for robot in world.robots:
        if robot.stationary:
            continue
        if robot.mode == PATROLLING:
            reached = robot.patrol_goal is not None and math.hypot(
                robot.pose[0] - robot.patrol_goal[0], robot.pose[1] - robot.patrol_goal[1]) <= world.goal_tolerance
            stale = world.clock - robot.goal_set_at >= world.goal_stale_after
            if robot.patrol_goal is None or reached or stale or not robot.path:
                world.new_patrol_goal(robot)
        _advance(world, robot, dt)
    for intr in world.intruders:
        if not intr.active or not intr.mobile:
            continue
        done = _advance(world, intr, dt)
        if done and intr.goal is not None:
            at_goal = math.hypot(intr.pose[0] - intr.goal[0], intr.pose[1] - intr.goal[1]) <= world.goal_tolerance
            if intr.escape and at_goal:
                intr.escaped = True
                intr.path.clear()
                world.log("escaped", f"i{intr.id}", *intr.xy)
            elif intr.escape:
                intr.path = world.route(intr.xy, intr.goal)
            else:
                set_wander_goal(world, intr)
    world.clock += dt
    world.steps += 1
    return world


def set_wander_goal(world: WorldModel, intr: IntruderState):
    goal = world.sample_free_point(world.wander_region or world.arena.interior, patrol.GOAL_CLEARANCE)
    intr.goal = goal
    intr.path = world.route(intr.xy, goal)
    world.log("goal", f"i{intr.id}", *goal)


# --------------------------------------------------------------------------
# pursuit and capture

def dispatch_pursuit(world: WorldModel, fused, gate: float = PURSUIT_GATE,
                     timeout: float | None = None) -> WorldModel:
    """Assign fused detections to robots.

    Pursuing robots first re-acquire the detection nearest their current
    target (within ``gate`` meters); leftover detections go to idle robots by
    repeatedly taking the globally closest (robot, detection) pair.
    """
    timeout = world.pursuit_timeout if timeout is None else timeout
    cents = [world.box_centroid(d.box if hasattr(d, "box") else d) for d in fused]
    free = list(range(len(cents)))

    for robot in world.robots:
        if robot.mode != PURSUING:
            continue
        best, best_d = None, gate
        for k in free:
            d = math.hypot(cents[k][0] - robot.pursuit_target[0], cents[k][1] - robot.pursuit_target[1])
            if d <= best_d:
                best, best_d = k, d
        if best is not None:
            free.remove(best)
            _pursue(world, robot, cents[best])
        elif world.clock - robot.last_seen > timeout:
            robot.mode = PATROLLING
            robot.pursuit_target = None
            robot.routed_to = None
            robot.path = []

    idle = [r for r in world.robots if r.mode != PURSUING and not r.stationary]
    pairs = sorted((math.hypot(cents[k][0] - r.pose[0], cents[k][1] - r.pose[1]), r.id, k)
                   for r in idle for k in free)
    taken_r, taken_k = set(), set()
    by_id = {r.id: r for r in idle}
    for _, rid, k in pairs:
        if rid in taken_r or k in taken_k:
            continue
        taken_r.add(rid)
        taken_k.add(k)
        robot = by_id[rid]
        robot.mode = PURSUING
        world.log("pursue", f"r{rid}", *cents[k])
        _pursue(world, robot, cents[k])
    return world


def _pursue(world, robot, target):
    robot.pursuit_target = target
    robot.last_seen = world.clock
    if (robot.routed_to is None or not robot.path
            or math.hypot(target[0] - robot.routed_to[0], target[1] - robot.routed_to[1]) > 0.3
            or len(robot.path) == 1):
        robot.path = world.route(robot.xy, target)
        robot.routed_to = target


def check_captures(world: WorldModel, capture_radius: float = CAPTURE_RADIUS) -> WorldModel:
    """Mark active intruders within ``capture_radius`` of any robot as caught."""
    if capture_radius <= 0:
        return world
    for intr in world.intruders:
        if not intr.active:
            continue
        for robot in world.robots:
            if math.hypot(intr.pose[0] - robot.pose[0], intr.pose[1] - robot.pose[1]) <= capture_radius:
                intr.caught = True
                intr.path.clear()
                world.log("caught", f"i{intr.id}", *intr.xy)
                if not intr.mobile:
                    world.invalidate()
                break
    return world
