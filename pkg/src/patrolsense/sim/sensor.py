"""Simulated 2D LiDAR: grid ray casting and local costmap synthesis."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np
from scipy import ndimage

from ..errors import InvalidParameterError
from ..gridmap import Costmap, GridPoint, world_to_grid
from ..localview import crop_coords

LOCAL_INFLATION = 0.2
# nudges an endpoint across the cell boundary the ray stopped at
_ENDPOINT_NUDGE = 1e-6


@dataclass(frozen=True)
class SensorSpec:
    beam_count: int = 360
    max_range: float = 2.5
    rate: float = 5.0
    noise_sigma: float = 0.0

    def __post_init__(self):
        if self.beam_count <= 0:
            raise InvalidParameterError("beam_count must be > 0")
        if not self.max_range > 0:
            raise InvalidParameterError("max_range must be > 0")
        if not self.rate > 0:
            raise InvalidParameterError("rate must be > 0")

    @property
    def bearings(self) -> np.ndarray:
        return np.arange(self.beam_count) * (2.0 * math.pi / self.beam_count)

    def window_cells(self, resolution: float) -> int:
        """Side of the square local window, in cells, that holds every possible hit."""
        return 2 * math.ceil(self.max_range / resolution - 1e-9) + 4


@numba.njit(cache=True)
def _cast(occ, fx, fy, angles, max_cells):
    h, w = occ.shape
    n = angles.shape[0]
    out = np.full(n, max_cells)
    ix0 = int(math.floor(fx))
    iy0 = int(math.floor(fy))
    for b in range(n):
        dx = math.cos(angles[b])
        dy = math.sin(angles[b])
        ix, iy = ix0, iy0
        if dx > 0:
            sx, tmx, tdx = 1, (ix + 1 - fx) / dx, 1.0 / dx
        elif dx < 0:
            sx, tmx, tdx = -1, (ix - fx) / dx, -1.0 / dx
        else:
            sx, tmx, tdx = 0, np.inf, np.inf
        if dy > 0:
            sy, tmy, tdy = 1, (iy + 1 - fy) / dy, 1.0 / dy
        elif dy < 0:
            sy, tmy, tdy = -1, (iy - fy) / dy, -1.0 / dy
        else:
            sy, tmy, tdy = 0, np.inf, np.inf
        while True:
            if tmx < tmy:
                t = tmx
                ix += sx
                tmx += tdx
            else:
                t = tmy
                iy += sy
                tmy += tdy
            if t >= max_cells:
                break
            if ix < 0 or iy < 0 or ix >= w or iy >= h:
                break
            if occ[iy, ix]:
                out[b] = t
                break
    return out


def cast_rays(occupied: np.ndarray, origin, resolution: float, position, angles, max_range: float) -> np.ndarray:
    """Exact grid traversal from ``position`` along each angle.

    Returns the distance to the boundary of the first occupied cell, or
    ``max_range``. The starting cell is never reported as a hit.
    """
    fx = (position[0] - origin[0]) / resolution
    fy = (position[1] - origin[1]) / resolution
    cells = _cast(np.ascontiguousarray(occupied, dtype=np.bool_), fx, fy,
                  np.asarray(angles, dtype=np.float64), max_range / resolution)
    return np.minimum(cells * resolution, max_range)


def raycast(world, pose, spec: SensorSpec | None = None, exclude=None) -> np.ndarray:
    """Ranges seen from ``pose`` in the current world.

    ``exclude`` names the robot whose own body is left out of the scene.
    Bearings are relative to the robot heading; noise, if any, comes from the
    world's generator.
    """
    spec = spec or world.sensor
    occ = world.occupancy(exclude=exclude)
    heading = pose[2] if len(pose) > 2 else 0.0
    ranges = cast_rays(occ, world.prior.origin, world.prior.resolution, pose,
                       spec.bearings + heading, spec.max_range)
    if spec.noise_sigma > 0:
        hit = ranges < spec.max_range
        noisy = ranges + world.rng.normal(0.0, spec.noise_sigma, ranges.shape)
        ranges = np.where(hit, np.clip(noisy, 0.0, spec.max_range), ranges)
    return ranges


def local_window(pose, anchor, window_dims) -> tuple[GridPoint, tuple[float, float]]:
    """Low corner (global cell) and world origin of the robot-centred window."""
    c = world_to_grid(pose, anchor)
    tl, _ = crop_coords(c, window_dims[0], window_dims[1])
    origin = (anchor.origin[0] + tl[0] * anchor.resolution, anchor.origin[1] + tl[1] * anchor.resolution)
    return tl, origin


def decay_cost(distance, inflation_radius: float):
    """100 on the hit cell, then linear decay from 99 to 0 at ``inflation_radius``."""
    d = np.asarray(distance, dtype=float)
    if inflation_radius <= 0:
        return np.where(d == 0, 100, 0).astype(np.uint8)
    ramp = np.floor(99.0 * (1.0 - d / inflation_radius))
    cost = np.where(d <= inflation_radius, np.clip(ramp, 0, 99), 0)
    return np.where(d == 0, 100, cost).astype(np.uint8)


def effective_inflation(inflation_radius: float, thresh: int) -> float:
    """Largest distance from a hit whose decayed cost still reaches ``thresh``."""
    if thresh > 99 or inflation_radius <= 0:
        return 0.0
    return inflation_radius * (1.0 - thresh / 99.0)


def scan_to_costmap(scan, pose, window_dims, inflation_radius: float, anchor,
                    max_range: float, bearings=None) -> Costmap:
    """Rasterize scan endpoints into a robot-centred local costmap.

    The window is aligned with ``anchor`` (the global grid) so local cell
    ``(i, j)`` is global cell ``tl + (i, j)``.
    """
    scan = np.asarray(scan, dtype=float)
    if bearings is None:
        bearings = np.arange(scan.size) * (2.0 * math.pi / scan.size)
    heading = pose[2] if len(pose) > 2 else 0.0
    w, l = window_dims
    res = anchor.resolution
    tl, origin = local_window(pose, anchor, window_dims)
    hits = np.zeros((l, w), dtype=bool)
    sel = scan < max_range
    if sel.any():
        r = scan[sel] + _ENDPOINT_NUDGE
        ang = np.asarray(bearings)[sel] + heading
        # index through the global frame so cells agree exactly with the ray caster
        cols = np.floor((pose[0] + r * np.cos(ang) - anchor.origin[0]) / res).astype(int) - tl[0]
        rows = np.floor((pose[1] + r * np.sin(ang) - anchor.origin[1]) / res).astype(int) - tl[1]
        inside = (cols >= 0) & (cols < w) & (rows >= 0) & (rows < l)
        hits[rows[inside], cols[inside]] = True
    if not hits.any():
        return Costmap(np.zeros((l, w), dtype=np.uint8), res, origin)
    dist = ndimage.distance_transform_edt(~hits) * res
    return Costmap(decay_cost(dist, inflation_radius), res, origin)
