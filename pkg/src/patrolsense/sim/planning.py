"""Shortest paths on binary grids and line-of-sight checks."""
from __future__ import annotations

import heapq
import math

import numpy as np

from ..errors import NoPathError
from ..gridmap import BinaryGrid, GridPoint

SQRT2 = math.sqrt(2.0)
_MOVES = [(1, 0, 1.0), (-1, 0, 1.0), (0, 1, 1.0), (0, -1, 1.0),
          (1, 1, SQRT2), (1, -1, SQRT2), (-1, 1, SQRT2), (-1, -1, SQRT2)]


def _blocked_mask(grid) -> np.ndarray:
    return grid.occupied if isinstance(grid, BinaryGrid) else np.asarray(grid, dtype=bool)


def octile(a, b) -> float:
    dx, dy = abs(a[0] - b[0]), abs(a[1] - b[1])
    return max(dx, dy) + (SQRT2 - 1.0) * min(dx, dy)


def plan_path(grid, start, goal) -> list[GridPoint]:
    """A* over 8-connected free cells; diagonal moves may not cut blocked corners.

    ``grid`` is a BinaryGrid (0 = blocked) or a boolean blocked mask. The
    start cell itself may be blocked; the goal may not.
    """
    blocked = _blocked_mask(grid)
    h, w = blocked.shape
    sx, sy = int(start[0]), int(start[1])
    gx, gy = int(goal[0]), int(goal[1])
    for name, (x, y) in (("start", (sx, sy)), ("goal", (gx, gy))):
        if not (0 <= x < w and 0 <= y < h):
            raise NoPathError(f"{name} cell {(x, y)} is outside the grid")
    if blocked[gy, gx]:
        raise NoPathError(f"goal cell {(gx, gy)} is occupied")
    if (sx, sy) == (gx, gy):
        return [GridPoint(sx, sy)]

    free = (~blocked).ravel().tolist()
    n = w * h
    g_cost = [math.inf] * n
    parent = [-1] * n
    closed = bytearray(n)
    s, goal_idx = sy * w + sx, gy * w + gx
    g_cost[s] = 0.0
    heap = [(octile((sx, sy), (gx, gy)), 0.0, s)]
    k = SQRT2 - 1.0
    while heap:
        _, g, cur = heapq.heappop(heap)
        if closed[cur]:
            continue
        if cur == goal_idx:
            break
        closed[cur] = 1
        cy, cx = divmod(cur, w)
        for dx, dy, step in _MOVES:
            nx, ny = cx + dx, cy + dy
            if nx < 0 or ny < 0 or nx >= w or ny >= h:
                continue
            nb = ny * w + nx
            if not free[nb] or closed[nb]:
                continue
            if dx and dy and not (free[cy * w + nx] and free[ny * w + cx]):
                continue
            ng = g + step
            if ng < g_cost[nb] - 1e-12:
                g_cost[nb] = ng
                parent[nb] = cur
                ax, ay = abs(nx - gx), abs(ny - gy)
                hval = (ax + k * ay) if ax > ay else (ay + k * ax)
                heapq.heappush(heap, (ng + hval, ng, nb))
    else:
        raise NoPathError(f"no path from {(sx, sy)} to {(gx, gy)}")
    if g_cost[goal_idx] == math.inf:
        raise NoPathError(f"no path from {(sx, sy)} to {(gx, gy)}")

    path = []
    cur = goal_idx
    while cur != -1:
        cy, cx = divmod(cur, w)
        path.append(GridPoint(cx, cy))
        cur = parent[cur]
    path.reverse()
    return path


def path_cost(path) -> float:
    return sum(math.hypot(b[0] - a[0], b[1] - a[1]) for a, b in zip(path, path[1:]))


def line_of_sight(blocked: np.ndarray, origin, resolution: float, p, q, step_cells: float = 0.25) -> bool:
    """True when no blocked cell is met sampling the segment ``p -> q``."""
    length = math.hypot(q[0] - p[0], q[1] - p[1]) / resolution
    n = max(2, int(math.ceil(length / step_cells)) + 1)
    t = np.linspace(0.0, 1.0, n)
    cols = np.floor((p[0] + t * (q[0] - p[0]) - origin[0]) / resolution).astype(int)
    rows = np.floor((p[1] + t * (q[1] - p[1]) - origin[1]) / resolution).astype(int)
    h, w = blocked.shape
    if (cols < 0).any() or (rows < 0).any() or (cols >= w).any() or (rows >= h).any():
        return False
    return not blocked[rows, cols].any()
