"""Per-robot background subtraction against the prior map.

A robot's live local grid ``A`` is compared with the matching window ``B`` of
the prior global grid: ``C = A | B`` keeps everything occupied in both, and
``D = |A - C|`` is 255 exactly where the robot sees something the prior map
does not contain. Blobs of ``D`` become bounding boxes in global grid cells.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import ndimage

from .errors import EmptyWindowError, InvalidParameterError, ShapeError
from .gridmap import BinaryGrid, GridPoint, world_to_grid

_EIGHT_CONNECTED = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True, order=True)
class BBox:
    """Half-open box ``[x1, x2) x [y1, y2)`` in global grid cells."""

    x1: int
    y1: int
    x2: int
    y2: int

    def __post_init__(self):
        if not (self.x1 < self.x2 and self.y1 < self.y2):
            raise InvalidParameterError(f"degenerate box {self.as_tuple()}")

    @property
    def width(self) -> int:
        return self.x2 - self.x1

    @property
    def height(self) -> int:
        return self.y2 - self.y1

    @property
    def area(self) -> int:
        return (self.x2 - self.x1) * (self.y2 - self.y1)

    @property
    def center(self) -> tuple[float, float]:
        return (self.x1 + self.x2) / 2.0, (self.y1 + self.y2) / 2.0

    def intersection_area(self, other: "BBox") -> int:
        w = min(self.x2, other.x2) - max(self.x1, other.x1)
        h = min(self.y2, other.y2) - max(self.y1, other.y1)
        return w * h if w > 0 and h > 0 else 0

    def intersects(self, other: "BBox") -> bool:
        return self.intersection_area(other) > 0

    def translated(self, dx: int, dy: int) -> "BBox":
        return BBox(self.x1 + dx, self.y1 + dy, self.x2 + dx, self.y2 + dy)

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.x1, self.y1, self.x2, self.y2)


@dataclass(frozen=True)
class CropWindow:
    """Matching sub-windows of the local grid (``lmap``) and the global grid (``gmap``).

    Corners are half-open: ``tl`` is inclusive, ``br`` exclusive. With the
    grid's y-up convention ``tl`` is the low corner.
    """

    lmap_tl: GridPoint
    lmap_br: GridPoint
    gmap_tl: GridPoint
    gmap_br: GridPoint

    @property
    def size(self) -> tuple[int, int]:
        """``(w_new, l_new)``."""
        return self.gmap_br[0] - self.gmap_tl[0], self.gmap_br[1] - self.gmap_tl[1]

    @property
    def offset(self) -> tuple[int, int]:
        """Add to a local-grid cell to get the global-grid cell."""
        return self.gmap_tl[0] - self.lmap_tl[0], self.gmap_tl[1] - self.lmap_tl[1]

    @property
    def lmap_slice(self) -> tuple[slice, slice]:
        return (slice(self.lmap_tl[1], self.lmap_br[1]), slice(self.lmap_tl[0], self.lmap_br[0]))

    @property
    def gmap_slice(self) -> tuple[slice, slice]:
        return (slice(self.gmap_tl[1], self.gmap_br[1]), slice(self.gmap_tl[0], self.gmap_br[0]))


@dataclass(frozen=True)
class LocalFrame:
    robot_id: int
    A: BinaryGrid
    B: BinaryGrid
    C: BinaryGrid
    D: BinaryGrid
    window: CropWindow
    boxes: list = field(default_factory=list)


def crop_coords(center, local_w: int, local_l: int) -> tuple[GridPoint, GridPoint]:
    """Window of ``local_w x local_l`` cells with the robot at index ``(w//2, l//2)``."""
    if local_w < 0 or local_l < 0:
        raise InvalidParameterError("local window extents must be non-negative")
    x1 = center[0] - local_w // 2
    y1 = center[1] - local_l // 2
    return GridPoint(x1, y1), GridPoint(x1 + local_w, y1 + local_l)


def clamp_crop(tl, br, global_dims, local_dims) -> CropWindow:
    """Clip a crop window to the global grid, shrinking the local window to match.

    ``global_dims`` is ``(W, L)`` and ``local_dims`` ``(w, l)``, both in cells,
    with ``br - tl == local_dims``.
    """
    W, L = global_dims
    w, l = local_dims
    if (br[0] - tl[0], br[1] - tl[1]) != (w, l):
        raise InvalidParameterError(f"window {tl}..{br} does not span local dims {local_dims}")
    if br[0] <= 0 or br[1] <= 0 or tl[0] >= W or tl[1] >= L:
        raise EmptyWindowError(f"crop window {tuple(tl)}..{tuple(br)} lies outside the {W}x{L} global grid")

    lx1, ly1, lx2, ly2 = 0, 0, w, l
    gx1, gy1, gx2, gy2 = tl[0], tl[1], br[0], br[1]
    if tl[0] < 0:
        lx1, gx1 = abs(tl[0]), 0
    if tl[1] < 0:
        ly1, gy1 = abs(tl[1]), 0
    if br[0] > W:
        lx2, gx2 = w - (br[0] - W), W
    if br[1] > L:
        ly2, gy2 = l - (br[1] - L), L
    return CropWindow(GridPoint(lx1, ly1), GridPoint(lx2, ly2),
                      GridPoint(gx1, gy1), GridPoint(gx2, gy2))


def _check_same_shape(a: BinaryGrid, b: BinaryGrid):
    if a.shape != b.shape:
        raise ShapeError(f"grid shapes differ: {a.shape} vs {b.shape}")


def or_merge(A: BinaryGrid, B: BinaryGrid) -> BinaryGrid:
    _check_same_shape(A, B)
    return A.with_cells(np.bitwise_or(A.cells, B.cells))


def abs_diff(A: BinaryGrid, C: BinaryGrid) -> BinaryGrid:
    _check_same_shape(A, C)
    diff = np.abs(A.cells.astype(np.int16) - C.cells.astype(np.int16)).astype(np.uint8)
    return A.with_cells(diff)


def connected_components(D: BinaryGrid) -> list[np.ndarray]:
    """8-connected blobs of 255-cells, each an ``(n, 2)`` array of ``(x, y)`` cells.

    Components are ordered by their first cell in row-major order.
    """
    labels, count = ndimage.label(D.cells == 255, structure=_EIGHT_CONNECTED)
    if count == 0:
        return []
    ys, xs = np.nonzero(labels)
    lab = labels[ys, xs]
    order = np.argsort(lab, kind="stable")
    splits = np.cumsum(np.bincount(lab, minlength=count + 1)[1:])[:-1]
    cells = np.stack([xs[order], ys[order]], axis=1)
    return np.split(cells, splits)


def bounding_boxes(components: Sequence[np.ndarray], window: CropWindow) -> list[BBox]:
    """Tight boxes around components given in local-grid cells, moved into the global grid."""
    dx, dy = window.offset
    boxes = []
    for comp in components:
        lo = comp.min(axis=0)
        hi = comp.max(axis=0)
        boxes.append(BBox(int(lo[0]) + dx, int(lo[1]) + dy, int(hi[0]) + 1 + dx, int(hi[1]) + 1 + dy))
    return boxes


def _sub(grid: BinaryGrid, window_slice) -> BinaryGrid:
    ys, xs = window_slice
    origin = (grid.origin[0] + xs.start * grid.resolution, grid.origin[1] + ys.start * grid.resolution)
    return BinaryGrid(grid.cells[window_slice], grid.resolution, origin)


def process_frame(A: BinaryGrid, global_grid: BinaryGrid, robot_pose, robot_id: int = 0,
                  min_blob_cells: int = 1) -> LocalFrame:
    """Run the whole per-robot pipeline on one local grid.

    ``A`` must be the robot-centred local window (robot at cell
    ``(w//2, l//2)``); ``global_grid`` is the (inflated) prior.
    """
    center = world_to_grid(robot_pose, global_grid)
    tl, br = crop_coords(center, A.width, A.height)
    window = clamp_crop(tl, br, (global_grid.width, global_grid.height), (A.width, A.height))
    a = _sub(A, window.lmap_slice)
    b = _sub(global_grid, window.gmap_slice)
    # local and global crops describe the same cells
    a = BinaryGrid(a.cells, b.resolution, b.origin)
    c = or_merge(a, b)
    d = abs_diff(a, c)
    # D covers only the clamped part of the local grid
    comps = [comp + np.asarray(window.lmap_tl) for comp in connected_components(d)
             if len(comp) >= min_blob_cells]
    return LocalFrame(robot_id, a, b, c, d, window, bounding_boxes(comps, window))
