"""The two experiment drivers: the Map 1 detection test and the Map 2 labyrinth campaign."""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from statistics import fmean

import numpy as np

from ..config import RunConfig
from ..gridmap import load_map, save_map, write_pgm, grid_to_image
from ..pipeline import DetectionConfig, run_frame
from ..sim.scenario import add_intruder, add_robot, populate_map1, populate_map2
from ..sim.sensor import SensorSpec
from ..sim.world import (WorldModel, check_captures, dispatch_pursuit, make_map1, make_map2,
                         make_world_from_grid, set_wander_goal, step)
from . import records
from .metrics import TrialMetrics, frame_score, success_rate

log = logging.getLogger(__name__)

N_STATIONARY_MAP1 = 3


def detection_config(cfg: RunConfig) -> DetectionConfig:
    return DetectionConfig(cfg.thresh_local, cfg.thresh_global, cfg.iou_threshold, cfg.robot_diameter,
                           cfg.local_inflation, cfg.min_blob_cells)


def sensor_spec(cfg: RunConfig) -> SensorSpec:
    return SensorSpec(cfg.beams, cfg.max_range, cfg.rate, cfg.noise_sigma)


def steps_per_frame(cfg: RunConfig) -> int:
    return max(1, int(round(1.0 / (cfg.rate * cfg.dt))))


def empty_world(cfg: RunConfig, seed: int) -> WorldModel:
    spec = sensor_spec(cfg)
    if cfg.map == "map1":
        world = make_map1(cfg.resolution, seed, cfg.global_inflation, spec, cfg.thresh_global)
    elif cfg.map == "map2":
        world = make_map2(cfg.resolution, seed, cfg.door_width, cfg.global_inflation, spec, cfg.thresh_global)
    else:
        world = make_world_from_grid(load_map(cfg.map), seed, cfg.global_inflation, spec, Path(cfg.map).stem)
    world.pursuit_timeout = cfg.pursuit_timeout
    return world


def _place_explicit(world: WorldModel, cfg: RunConfig, n_robots: int):
    for xy in (cfg.robot_positions or [])[:n_robots]:
        robot = add_robot(world, xy[:2], xy[2] if len(xy) > 2 else 0.0)
        robot.stationary = cfg.robot_speed == 0
        robot.speed_limit = cfg.robot_speed
    for spec in cfg.intruder_positions or []:
        spec = dict(spec)
        xy = (spec.pop("x"), spec.pop("y"))
        shape = spec.pop("shape", "disc")
        kwargs = {"shape": shape, "mobile": bool(spec.pop("mobile", False))}
        if shape == "rect":
            kwargs["size"] = (float(spec.pop("w")), float(spec.pop("l")))
        else:
            kwargs["radius"] = float(spec.pop("radius", cfg.intruder_radius))
        intr = add_intruder(world, xy, speed_limit=cfg.intruder_speed, **kwargs)
        if intr.mobile:
            set_wander_goal(world, intr)


def setup_detection_world(cfg: RunConfig, n_robots: int, n_intruders: int, seed: int) -> WorldModel:
    world = empty_world(cfg, seed)
    if cfg.robot_positions is not None or cfg.intruder_positions is not None:
        _place_explicit(world, cfg, n_robots)
        return world
    n_stationary = min(N_STATIONARY_MAP1, n_intruders) if cfg.mobile_intruders is None \
        else n_intruders - cfg.mobile_intruders
    populate_map1(world, n_robots, n_intruders - n_stationary, n_stationary, cfg.intruder_radius,
                  (cfg.box_side_min, cfg.box_side_max))
    for r in world.robots:
        r.speed_limit = cfg.robot_speed
        r.stationary = cfg.robot_speed == 0
    for i in world.intruders:
        i.speed_limit = cfg.intruder_speed
    return world


def in_range_flags(world: WorldModel, max_range: float) -> list[bool]:
    return [any(math.hypot(i.pose[0] - r.pose[0], i.pose[1] - r.pose[1]) <= max_range for r in world.robots)
            for i in world.intruders]


def score_frame(world: WorldModel, fused, index: int):
    active = [i for i in world.intruders if i.active]
    truth = [world.truth_box(i) for i in active]
    flags = [any(math.hypot(i.pose[0] - r.pose[0], i.pose[1] - r.pose[1]) <= world.sensor.max_range
                 for r in world.robots) for i in active]
    return frame_score(fused, truth, flags, index)


def dump_frame(dump_dir: Path, out, windows: list):
    for lf in out.frames:
        for name in "ABCD":
            write_pgm(dump_dir / f"r{lf.robot_id}_f{out.index}_{name}.pgm", grid_to_image(getattr(lf, name)))
        w = lf.window
        windows.append([out.index, lf.robot_id, *w.lmap_tl, *w.lmap_br, *w.gmap_tl, *w.gmap_br])


def run_detection_trial(cfg: RunConfig, out_dir=None, n_robots: int | None = None,
                        n_intruders: int | None = None) -> TrialMetrics:
    """Simulate, sense, fuse and score ``cfg.n_frames()`` sensor frames on one seeded world."""
    cfg.validate(detection=True)
    seed = cfg.ensure_seed()
    n_robots = cfg.robots[0] if n_robots is None else n_robots
    n_intruders = cfg.intruders[0] if n_intruders is None else n_intruders
    world = setup_detection_world(cfg, n_robots, n_intruders, seed)
    det_cfg = detection_config(cfg)
    per_frame = steps_per_frame(cfg)
    metrics = TrialMetrics()
    fused_log = []
    dump_dir = Path(cfg.dump_frames) if cfg.dump_frames else None
    windows = []
    if dump_dir:
        dump_dir.mkdir(parents=True, exist_ok=True)
        save_map(world.inflated_prior, dump_dir / "global")
    for k in range(cfg.n_frames()):
        for _ in range(per_frame):
            step(world, cfg.dt)
        out = run_frame(world, det_cfg, k)
        metrics.add(score_frame(world, out.fused, k))
        fused_log.extend(out.fused)
        if dump_dir:
            dump_frame(dump_dir, out, windows)
    if dump_dir:
        records.write_detections(dump_dir / "detections.csv", fused_log)
        records._write(dump_dir / "windows.csv",
                       ["frame", "robot", "lmap_x1", "lmap_y1", "lmap_x2", "lmap_y2",
                        "gmap_x1", "gmap_y1", "gmap_x2", "gmap_y2"], windows)
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        records.write_frame_scores(out_dir / "frames.csv", metrics)
        records.write_detections(out_dir / "detections.csv", fused_log)
        records.write_events(out_dir / "events.csv", world.events)
    return metrics


# --------------------------------------------------------------------------
# labyrinth

@dataclass(frozen=True)
class LabyrinthTrial:
    n_intruders: int
    n_robots: int
    trial: int
    seed: int
    caught: int
    total: int
    sim_time: float

    @property
    def success_rate(self) -> float:
        return success_rate(self.caught, self.total)


@dataclass
class CampaignCell:
    n_intruders: int
    n_robots: int
    success_rates: list = field(default_factory=list)

    @property
    def trials(self) -> int:
        return len(self.success_rates)

    @property
    def mean_success(self) -> float:
        return fmean(self.success_rates)


def trial_seed(base: int, n_intruders: int, n_robots: int, trial: int) -> int:
    return int(np.random.SeedSequence([base, n_intruders, n_robots, trial]).generate_state(1)[0])


def run_labyrinth_trial(cfg: RunConfig, n_intruders: int, n_robots: int, seed: int,
                        trial: int = 0) -> LabyrinthTrial:
    """One seeded chase on Map 2; ends when no intruder is left or at ``cfg.time_cap``."""
    world = empty_world(replace(cfg, map="map2") if cfg.map == "map1" else cfg, seed)
    if cfg.robot_positions is not None or cfg.intruder_positions is not None:
        _place_explicit(world, cfg, n_robots)
        for intr in world.intruders:
            if intr.mobile and world.arena.escape_points:
                goal = min(world.arena.escape_points,
                           key=lambda e: -math.hypot(e[0] - intr.pose[0], e[1] - intr.pose[1]))
                intr.goal, intr.escape = goal, True
                intr.path = world.route(intr.xy, goal)
    else:
        populate_map2(world, n_robots, n_intruders, cfg.intruder_radius, cfg.escape_distance)
    for r in world.robots:
        r.speed_limit = cfg.robot_speed
    for i in world.intruders:
        i.speed_limit = cfg.intruder_speed
    det_cfg = detection_config(cfg)
    per_frame = steps_per_frame(cfg)
    k = 0
    while world.clock < cfg.time_cap - 1e-9 and any(i.active for i in world.intruders):
        step(world, cfg.dt)
        check_captures(world, cfg.capture_radius)
        if world.steps % per_frame == 0:
            out = run_frame(world, det_cfg, k)
            dispatch_pursuit(world, out.fused)
            k += 1
    caught = sum(i.caught for i in world.intruders)
    return LabyrinthTrial(n_intruders, n_robots, trial, seed, caught, len(world.intruders), world.clock)


def _trial_job(args):
    cfg, ni, nr, seed, t = args
    return run_labyrinth_trial(cfg, ni, nr, seed, t)


def run_labyrinth_campaign(cfg: RunConfig, out_dir=None, progress=None):
    """Run ``cfg.trials`` seeded trials for every (intruders, robots) pair.

    Returns ``(cells, trials)``: cells keyed by ``(n_intruders, n_robots)``.
    """
    cfg.validate()
    base = cfg.ensure_seed()
    jobs = [(cfg, ni, nr, trial_seed(base, ni, nr, t), t)
            for ni in cfg.intruders for nr in cfg.robots for t in range(cfg.trials)]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(cfg.jobs) as pool:
            results = list(pool.map(_trial_job, jobs))
    else:
        results = []
        for job in jobs:
            results.append(_trial_job(job))
            if progress:
                progress(results[-1])
    results.sort(key=lambda r: (r.n_intruders, r.n_robots, r.trial))
    cells = {}
    for r in results:
        cells.setdefault((r.n_intruders, r.n_robots), CampaignCell(r.n_intruders, r.n_robots)) \
            .success_rates.append(r.success_rate)
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        records.write_campaign(out_dir / "campaign.csv", results)
        records.write_campaign_means(out_dir / "campaign_mean.csv", list(cells.values()))
    return cells, results


def plot_campaign(cells: dict, path) -> Path:
    """Mean success versus team size, one line per intruder count, as SVG."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with matplotlib.rc_context({"svg.hashsalt": "patrolsense"}):  # stable element ids
        return _draw_campaign(plt, cells, Path(path))


def _draw_campaign(plt, cells, path):
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for ni in sorted({k[0] for k in cells}):
        row = sorted((k[1], c.mean_success) for k, c in cells.items() if k[0] == ni)
        ax.plot([r for r, _ in row], [m for _, m in row], marker="o", label=f"{ni} intruder(s)")
    ax.set_xlabel("security robots")
    ax.set_ylabel("mean success rate (%)")
    ax.set_ylim(-2, 102)
    ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path
