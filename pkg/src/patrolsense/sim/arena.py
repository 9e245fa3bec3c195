"""Static arena geometry for the two testbeds and its rasterization."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..gridmap import DEFAULT_RESOLUTION, GLOBAL_THRESH, BinaryGrid, Costmap, inflate, threshold

WALL_THICKNESS = 0.1
DOOR_WIDTH = 1.0
GLOBAL_INFLATION = 0.1

Rect = tuple[float, float, float, float]  # x_min, y_min, x_max, y_max


@dataclass
class Arena:
    """Ground plane, wall rectangles and the patrolled interior, all in meters."""

    name: str
    ground: Rect
    walls: list[Rect]
    interior: Rect
    exits: list[tuple[tuple[float, float], tuple[float, float]]] = field(default_factory=list)
    escape_points: list[tuple[float, float]] = field(default_factory=list)

    @property
    def origin(self) -> tuple[float, float]:
        return self.ground[0], self.ground[1]

    @property
    def diagonal(self) -> float:
        """Diagonal of the enclosed (wall-centreline) region."""
        x0, y0, x1, y1 = self.interior
        t = WALL_THICKNESS
        return math.hypot(x1 - x0 + t, y1 - y0 + t)

    def grid_dims(self, resolution: float) -> tuple[int, int]:
        x0, y0, x1, y1 = self.ground
        return (int(round((x1 - x0) / resolution)), int(round((y1 - y0) / resolution)))


def _square_walls(half: float, t: float, doors: float = 0.0) -> list[Rect]:
    """Closed square of wall centreline half-size ``half``; optional doors on the x-sides."""
    lo, hi = -half - t / 2, half + t / 2
    walls = [(lo, lo, hi, -half + t / 2), (lo, half - t / 2, hi, hi)]
    for xc in (-half, half):
        xa, xb = xc - t / 2, xc + t / 2
        if doors > 0:
            walls.append((xa, lo, xb, -doors / 2))
            walls.append((xa, doors / 2, xb, hi))
        else:
            walls.append((xa, lo, xb, hi))
    return walls


def map1_arena() -> Arena:
    """8 m x 8 m ground with a closed 6 m x 6 m enclosure in the middle."""
    t = WALL_THICKNESS
    inner = 3.0 - t / 2
    return Arena("map1", (-4.0, -4.0, 4.0, 4.0), _square_walls(3.0, t), (-inner, -inner, inner, inner))


def map2_arena(door_width: float = DOOR_WIDTH) -> Arena:
    """24 m x 24 m ground, 20 m x 20 m boundary with doors centred on the west and east sides."""
    t = WALL_THICKNESS
    inner = 10.0 - t / 2
    exits = [((-10.0, -door_width / 2), (-10.0, door_width / 2)),
             ((10.0, -door_width / 2), (10.0, door_width / 2))]
    return Arena("map2", (-12.0, -12.0, 12.0, 12.0), _square_walls(10.0, t, door_width),
                 (-inner, -inner, inner, inner), exits, [(-11.0, 0.0), (11.0, 0.0)])


def cell_centers(arena_or_origin, shape, resolution):
    origin = arena_or_origin.origin if isinstance(arena_or_origin, Arena) else arena_or_origin
    h, w = shape
    xs = origin[0] + (np.arange(w) + 0.5) * resolution
    ys = origin[1] + (np.arange(h) + 0.5) * resolution
    return xs, ys


def rasterize_rects(rects, origin, shape, resolution) -> np.ndarray:
    """Boolean mask of cells whose centres fall inside any rectangle."""
    mask = np.zeros(shape, dtype=bool)
    h, w = shape
    eps = 1e-9
    for x0, y0, x1, y1 in rects:
        c0 = max(0, math.ceil((x0 - origin[0]) / resolution - 0.5 - eps))
        c1 = min(w, math.floor((x1 - origin[0]) / resolution - 0.5 + eps) + 1)
        r0 = max(0, math.ceil((y0 - origin[1]) / resolution - 0.5 - eps))
        r1 = min(h, math.floor((y1 - origin[1]) / resolution - 0.5 + eps) + 1)
        if c0 < c1 and r0 < r1:
            mask[r0:r1, c0:c1] = True
    return mask


def disc_cells(cx, cy, radius, origin, resolution, shape=None) -> tuple[np.ndarray, np.ndarray]:
    """``(rows, cols)`` of cells whose centres lie within ``radius`` of ``(cx, cy)``.

    The cell containing the centre is always included.
    """
    fx = (cx - origin[0]) / resolution
    fy = (cy - origin[1]) / resolution
    rc = radius / resolution
    n = int(math.ceil(rc)) + 1
    ix, iy = math.floor(fx), math.floor(fy)
    dy, dx = np.mgrid[-n:n + 1, -n:n + 1]
    cols = ix + dx
    rows = iy + dy
    d2 = (cols + 0.5 - fx) ** 2 + (rows + 0.5 - fy) ** 2
    keep = (d2 <= rc * rc + 1e-9) | ((dx == 0) & (dy == 0))
    rows, cols = rows[keep], cols[keep]
    if shape is not None:
        inside = (rows >= 0) & (rows < shape[0]) & (cols >= 0) & (cols < shape[1])
        rows, cols = rows[inside], cols[inside]
    return rows, cols


def wall_mask(arena: Arena, resolution: float = DEFAULT_RESOLUTION) -> np.ndarray:
    w, h = arena.grid_dims(resolution)
    return rasterize_rects(arena.walls, arena.origin, (h, w), resolution)


def global_costmap(arena: Arena, resolution: float = DEFAULT_RESOLUTION) -> Costmap:
    """Ground-truth costmap of the empty arena: walls cost 100, everything else 0."""
    cells = np.where(wall_mask(arena, resolution), 100, 0).astype(np.uint8)
    return Costmap(cells, resolution, arena.origin)


def build_global_maps(arena: Arena, resolution: float = DEFAULT_RESOLUTION,
                      global_inflation: float = GLOBAL_INFLATION,
                      thresh: int = GLOBAL_THRESH) -> tuple[BinaryGrid, BinaryGrid]:
    """Prior grid holding the walls only, and its inflated copy used as background."""
    prior = threshold(global_costmap(arena, resolution), thresh)
    return prior, inflate(prior, global_inflation)
