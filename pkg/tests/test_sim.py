import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.sparse import lil_matrix
from scipy.sparse.csgraph import dijkstra

from patrolsense.errors import ExhaustionError, InvalidParameterError, NoPathError
from patrolsense.fusion import Detection
from patrolsense.gridmap import GLOBAL_THRESH, LOCAL_THRESH, OCCUPIED, BinaryGrid, threshold, world_to_grid
from patrolsense.localview import BBox
from patrolsense.pipeline import DetectionConfig, run_frame, sense
from patrolsense.sim import arena as arena_mod
from patrolsense.sim.patrol import gen_patrol_goal, safe_distance
from patrolsense.sim.planning import path_cost, plan_path
from patrolsense.sim.scenario import add_intruder, add_robot, populate_map1, populate_map2
from patrolsense.sim.sensor import SensorSpec, cast_rays, decay_cost, raycast, scan_to_costmap
from patrolsense.sim.world import (PATROLLING, PURSUING, check_captures, dispatch_pursuit, make_map1,
                                   make_map2, step)


# ---------------------------------------------------------------- arenas

class TestArenas:
    def test_map1_grid_size(self):
        assert make_map1().prior.shape == (160, 160)

    def test_map2_grid_size(self):
        assert make_map2().prior.shape == (480, 480)

    def test_map2_boundary_is_20m(self):
        a = arena_mod.map2_arena()
        x0, y0, x1, y1 = a.interior
        assert (x1 - x0 + arena_mod.WALL_THICKNESS, y1 - y0 + arena_mod.WALL_THICKNESS) == \
            pytest.approx((20.0, 20.0))

    def test_map2_doors_are_free(self):
        w = make_map2()
        for x in (-10.0, 10.0):
            c = world_to_grid((x, 0.0), w.prior)
            assert not w.prior.occupied[c.y, c.x]
            c = world_to_grid((x, 3.0), w.prior)
            assert w.prior.occupied[c.y, c.x]

    def test_map1_enclosure_is_closed(self):
        w = make_map1()
        for p in [(-3.0, 0.0), (3.0, 0.0), (0.0, 3.0), (0.0, -3.0)]:
            c = world_to_grid(p, w.prior)
            assert w.prior.occupied[c.y, c.x]


# ---------------------------------------------------------------- ray casting

def ray_box_oracle(occ, fx, fy, angle, max_cells):
    """Slab intersection against every occupied cell except the one the ray starts in."""
    dx, dy = math.cos(angle), math.sin(angle)
    best = max_cells
    sx, sy = math.floor(fx), math.floor(fy)
    for y, x in zip(*np.nonzero(occ)):
        if (x, y) == (sx, sy):
            continue
        t0, t1 = -math.inf, math.inf
        for p, d, lo in ((fx, dx, x), (fy, dy, y)):
            if abs(d) < 1e-15:
                if not lo <= p <= lo + 1:
                    t0, t1 = math.inf, -math.inf
                continue
            a, b = (lo - p) / d, (lo + 1 - p) / d
            t0, t1 = max(t0, min(a, b)), min(t1, max(a, b))
        if t0 <= t1 and t1 > 0 and t0 >= 0:
            best = min(best, t0)
    return best


class TestRaycast:
    def test_wall_one_meter_ahead(self):
        occ = np.zeros((100, 100), bool)
        occ[:, 70] = True
        r = cast_rays(occ, (0.0, 0.0), 0.05, (2.5, 2.5), np.array([0.0]), 2.5)
        assert abs(r[0] - 1.0) <= 0.05

    def test_disc_at_two_meters(self):
        w = make_map1()
        add_intruder(w, (2.0, 0.0), radius=0.1)
        r = raycast(w, (0.0, 0.0, 0.0), SensorSpec(beam_count=4))
        assert r[0] == pytest.approx(1.9, abs=0.05)

    def test_start_cell_is_never_a_hit(self):
        occ = np.ones((3, 3), bool)
        occ[1, 1] = True
        r = cast_rays(occ, (0, 0), 1.0, (1.5, 1.5), np.array([0.0]), 5.0)
        assert r[0] == pytest.approx(0.5)

    @settings(max_examples=300)
    @given(st.integers(0, 2**32 - 1), st.floats(0.0, 2 * math.pi, exclude_max=True))
    def test_matches_continuous_geometry(self, seed, angle):
        rng = np.random.default_rng(seed)
        occ = rng.random((24, 24)) < 0.08
        fx, fy = rng.uniform(2, 22, size=2)
        got = cast_rays(occ, (0.0, 0.0), 1.0, (fx, fy), np.array([angle]), 15.0)[0]
        assert got == pytest.approx(ray_box_oracle(occ, fx, fy, angle, 15.0), abs=1e-9)

    def test_no_hit_returns_max_range(self):
        r = cast_rays(np.zeros((50, 50), bool), (0, 0), 0.05, (1.25, 1.25), np.array([0.3]), 0.5)
        assert r[0] == 0.5


class TestScanToCostmap:
    def test_single_hit(self):
        anchor = make_map1().prior
        scan = np.full(360, 2.5)
        scan[0] = 1.0
        cm = scan_to_costmap(scan, (0.0, 0.0, 0.0), (104, 104), 0.2, anchor, 2.5)
        hit = world_to_grid((1.0 + 1e-6, 0.0), anchor)
        tl = world_to_grid((0.0, 0.0), anchor)
        local = (hit.x - tl.x + 52, hit.y - tl.y + 52)
        assert cm.cells[local[1], local[0]] == 100
        assert cm.cells[local[1], local[0] + 1] > 0 and cm.cells[local[1] + 1, local[0]] > 0
        assert threshold(cm, LOCAL_THRESH).cells[local[1], local[0]] == OCCUPIED

    def test_decay_is_linear(self):
        assert decay_cost([0.0, 0.05, 0.1, 0.2, 0.3], 0.2).tolist() == [100, 74, 49, 0, 0]


# ---------------------------------------------------------------- planning

def dijkstra_oracle(blocked, start, goal):
    h, w = blocked.shape
    g = lil_matrix((h * w, h * w))
    for y in range(h):
        for x in range(w):
            if blocked[y, x]:
                continue
            for dx, dy in [(1, 0), (0, 1), (1, 1), (1, -1)]:
                nx, ny = x + dx, y + dy
                if not (0 <= nx < w and 0 <= ny < h) or blocked[ny, nx]:
                    continue
                if dx and dy and (blocked[y, nx] or blocked[ny, x]):
                    continue
                g[y * w + x, ny * w + nx] = math.hypot(dx, dy)
    d = dijkstra(g.tocsr(), directed=False, indices=start[1] * w + start[0])
    return d[goal[1] * w + goal[0]]


class TestPlanPath:
    def test_open_grid_straight_line(self):
        path = plan_path(np.zeros((10, 10), bool), (0, 0), (0, 9))
        assert len(path) - 1 == 9

    def test_start_equals_goal(self):
        assert plan_path(np.zeros((3, 3), bool), (1, 1), (1, 1)) == [(1, 1)]

    def test_goal_blocked(self):
        b = np.zeros((3, 3), bool)
        b[2, 2] = True
        with pytest.raises(NoPathError):
            plan_path(b, (0, 0), (2, 2))

    def test_unreachable(self):
        b = np.zeros((5, 5), bool)
        b[:, 2] = True
        with pytest.raises(NoPathError):
            plan_path(b, (0, 0), (4, 4))

    def test_no_corner_cutting(self):
        b = np.zeros((2, 2), bool)
        b[0, 1] = True
        with pytest.raises(NoPathError):
            plan_path(b | np.array([[False, False], [True, False]]), (0, 0), (1, 1))

    @settings(max_examples=60)
    @given(st.integers(2, 100), st.integers(2, 100), st.integers(0, 2**32 - 1))
    def test_cost_matches_dijkstra(self, h, w, seed):
        rng = np.random.default_rng(seed)
        b = rng.random((h, w)) < 0.25
        start = (int(rng.integers(w)), int(rng.integers(h)))
        goal = (int(rng.integers(w)), int(rng.integers(h)))
        b[start[1], start[0]] = b[goal[1], goal[0]] = False
        expected = dijkstra_oracle(b, start, goal)
        if math.isinf(expected):
            with pytest.raises(NoPathError):
                plan_path(b, start, goal)
        else:
            path = plan_path(b, start, goal)
            assert path[0] == start and path[-1] == goal
            assert all(not b[p[1], p[0]] for p in path)
            assert path_cost(path) == pytest.approx(expected, abs=1e-9)


# ---------------------------------------------------------------- patrol goals

class TestPatrolGoals:
    def test_safe_distance_map2(self):
        assert safe_distance(math.hypot(20, 20), 4) == pytest.approx(3.536, abs=1e-3)

    def test_safe_distance_rejects_empty_team(self):
        with pytest.raises(InvalidParameterError):
            safe_distance(10.0, 0)

    def test_single_robot_map1(self, rng):
        w = make_map1()
        z = safe_distance(w.arena.diagonal, 1)
        for _ in range(20):
            pos = w.sample_free_point(w.arena.interior, 0.4)
            (gx, gy), z_used = gen_patrol_goal(pos, [], w.prior, rng, w.arena.interior, z)
            if z_used == z:
                assert math.hypot(gx - pos[0], gy - pos[1]) >= z
            c = world_to_grid((gx, gy), w.prior)
            assert w.clearance[c.y, c.x] >= 0.4

    def test_five_goal_spacing_map2(self, rng):
        w = make_map2()
        z = safe_distance(math.hypot(20, 20), 5)
        assert z == pytest.approx(2.828, abs=1e-3)
        goals = []
        for _ in range(5):
            g, z_used = gen_patrol_goal((100.0, 100.0), goals, w.prior, rng, w.arena.interior, z)
            assert z_used == z
            goals.append(g)
        for i in range(5):
            for j in range(i):
                assert math.dist(goals[i], goals[j]) >= z

    def test_exhaustion(self, rng):
        full = BinaryGrid.from_mask(np.ones((10, 10), bool), 0.05)
        with pytest.raises(ExhaustionError):
            gen_patrol_goal((0, 0), [], full, rng, (0, 0, 0.5, 0.5), 0.1, max_tries=20, max_relaxations=1)


# ---------------------------------------------------------------- world stepping

class TestStep:
    def test_advance_by_speed_times_dt(self):
        w = make_map1()
        r = add_robot(w, (0.0, 0.0), 0.0)
        r.patrol_goal = (1.0, 0.0)
        r.path = [(1.0, 0.0)]
        r.goal_set_at = 0.0
        step(w, 0.05)
        assert r.pose[0] == pytest.approx(0.011)
        assert r.pose[1] == pytest.approx(0.0)
        assert w.clock == pytest.approx(0.05)

    def test_frames_every_fourth_step(self):
        from patrolsense.config import RunConfig
        from patrolsense.evaluation.experiments import steps_per_frame
        assert steps_per_frame(RunConfig()) == 4

    def test_speed_limit_respected(self, rng):
        w = make_map1(seed=3)
        populate_map1(w, 3)
        for _ in range(100):
            before = [tuple(e.pose[:2]) for e in w.robots + w.intruders]
            step(w)
            for e, b in zip(w.robots + w.intruders, before):
                assert math.dist(e.pose[:2], b) <= e.speed_limit * 0.05 + 1e-9

    def test_escape_event(self):
        w = make_map2()
        i = add_intruder(w, (10.9, 0.0), radius=0.1, goal=(11.0, 0.0), escape=True)
        i.path = [(11.0, 0.0)]
        for _ in range(10):  # 0.1 m at 0.011 m per step
            step(w)
        assert i.escaped and not i.caught
        assert any(e[1] == "escaped" for e in w.events)


class TestPursuit:
    def test_nearer_robot_pursues(self):
        w = make_map1()
        near, far = add_robot(w, (1.0, 0.0)), add_robot(w, (-2.0, 0.0))
        c = world_to_grid((1.8, 0.0), w.prior)
        dispatch_pursuit(w, [Detection(BBox(c.x, c.y, c.x + 1, c.y + 1), 0)])
        assert near.mode == PURSUING and far.mode == PATROLLING

    def test_one_robot_takes_nearer_detection(self):
        w = make_map1()
        r = add_robot(w, (0.0, 0.0))
        a, b = world_to_grid((0.5, 0.0), w.prior), world_to_grid((2.0, 0.0), w.prior)
        dispatch_pursuit(w, [Detection(BBox(b.x, b.y, b.x + 1, b.y + 1), 0),
                             Detection(BBox(a.x, a.y, a.x + 1, a.y + 1), 0)])
        assert r.pursuit_target[0] == pytest.approx(0.5, abs=0.05)

    def test_timeout_reverts_to_patrol(self):
        w = make_map1()
        r = add_robot(w, (0.0, 0.0))
        c = world_to_grid((1.0, 0.0), w.prior)
        dispatch_pursuit(w, [Detection(BBox(c.x, c.y, c.x + 1, c.y + 1), 0)])
        w.clock += 2.5
        dispatch_pursuit(w, [])
        assert r.mode == PATROLLING

    def test_capture_within_radius(self):
        w = make_map2()
        add_robot(w, (0.0, 0.0))
        i = add_intruder(w, (0.3, 0.0), radius=0.1, mobile=True)
        check_captures(w, 0.5)
        assert i.caught

    def test_zero_radius_never_captures(self):
        w = make_map2()
        add_robot(w, (0.0, 0.0))
        i = add_intruder(w, (0.0, 0.0), radius=0.1, mobile=True)
        check_captures(w, 0.0)
        assert not i.caught

    def test_escaped_intruder_is_not_caught(self):
        w = make_map2()
        add_robot(w, (0.0, 0.0))
        i = add_intruder(w, (0.2, 0.0), radius=0.1, mobile=True)
        i.escaped = True
        check_captures(w, 0.5)
        assert not i.caught


# ---------------------------------------------------------------- end-to-end sensing

class TestSensing:
    def test_robot_next_to_wall_sees_nothing(self):
        w = make_map1()
        r = add_robot(w, (2.6, 0.0), 0.0)
        r.stationary = True
        frame = sense(w, r, DetectionConfig())
        assert frame.boxes == []

    def test_empty_arena_no_detections(self):
        w = make_map1(seed=1)
        populate_map1(w, 1, n_mobile=0, n_stationary=0)
        for _ in range(5):
            assert run_frame(w, DetectionConfig(), 0).fused == []
            for _ in range(4):
                step(w)

    def test_populate_map2_spawn_rules(self):
        w = make_map2(seed=5)
        populate_map2(w, 5, 5)
        for i in w.intruders:
            assert math.hypot(*i.pose[:2]) >= 4.0
            assert math.dist(i.goal, i.pose[:2]) >= 12.0
            assert i.escape
