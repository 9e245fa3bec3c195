"""Random patrol goals spaced by the team's safe distance."""
from __future__ import annotations

import logging
import math

import numpy as np
from scipy import ndimage

from ..errors import ExhaustionError, InvalidParameterError

log = logging.getLogger(__name__)

GOAL_CLEARANCE = 0.4


def safe_distance(diagonal: float, n_robots: int) -> float:
    """Minimum spacing ``diagonal / (2 * n_robots)`` between patrol goals."""
    if n_robots < 1:
        raise InvalidParameterError("need at least one robot")
    if not diagonal > 0:
        raise InvalidParameterError("diagonal must be > 0")
    return diagonal / (2.0 * n_robots)


def clearance_map(occupied: np.ndarray, resolution: float) -> np.ndarray:
    """Distance in meters from each cell centre to the nearest occupied cell centre."""
    if not occupied.any():
        return np.full(occupied.shape, np.inf)
    return ndimage.distance_transform_edt(~occupied) * resolution


def gen_patrol_goal(position, other_goals, grid, rng, region, z: float,
                    clearance=None, min_clearance: float = GOAL_CLEARANCE,
                    max_tries: int = 1000, max_relaxations: int = 8):
    """Rejection-sample a goal inside ``region`` (x0, y0, x1, y1).

    A goal must be at least ``z`` from ``position`` and from every point in
    ``other_goals``, and at least ``min_clearance`` from any occupied cell of
    ``grid``. After ``max_tries`` failures ``z`` is halved and sampling
    restarts; returns ``(goal, z_used)``.
    """
    if clearance is None:
        clearance = clearance_map(grid.occupied, grid.resolution)
    others = np.asarray([g for g in other_goals if g is not None], dtype=float).reshape(-1, 2)
    x0, y0, x1, y1 = region
    res = grid.resolution
    h, w = clearance.shape
    for _ in range(max_relaxations + 1):
        for _ in range(max_tries):
            x = rng.uniform(x0, x1)
            y = rng.uniform(y0, y1)
            c = math.floor((x - grid.origin[0]) / res)
            r = math.floor((y - grid.origin[1]) / res)
            if not (0 <= r < h and 0 <= c < w) or clearance[r, c] < min_clearance:
                continue
            if math.hypot(x - position[0], y - position[1]) < z:
                continue
            if len(others) and (np.hypot(others[:, 0] - x, others[:, 1] - y) < z).any():
                continue
            return (x, y), z
        log.info("patrol goal: no sample after %d tries, relaxing z %.3f -> %.3f", max_tries, z, z / 2)
        z /= 2.0
    raise ExhaustionError("no admissible patrol goal found")
