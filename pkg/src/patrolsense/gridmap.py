"""Occupancy grids anchored in the world frame.

Grids are stored as ``(height, width)`` numpy arrays indexed ``[y, x]``:
``x`` is the column, ``y`` the row, and row 0 is the bottom row in the world.
``origin`` is the world position of the lower-left corner of cell ``(0, 0)``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Union

import numpy as np
import yaml
from scipy import ndimage

from .errors import InvalidParameterError, MapIntegrityError, MapParseError

OCCUPIED = 0
FREE = 255

DEFAULT_RESOLUTION = 0.05
GLOBAL_THRESH = 50
LOCAL_THRESH = 70


class GridPoint(NamedTuple):
    x: int
    y: int


class WorldPoint(NamedTuple):
    x: float
    y: float


def _frozen(arr: np.ndarray, dtype) -> np.ndarray:
    out = np.array(arr, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class _Grid:
    cells: np.ndarray
    resolution: float
    origin: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if not self.resolution > 0:
            raise InvalidParameterError(f"resolution must be > 0, got {self.resolution}")
        if np.ndim(self.cells) != 2 or 0 in np.shape(self.cells):
            raise InvalidParameterError(f"cells must be a non-empty 2D array, got shape {np.shape(self.cells)}")
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))
        object.__setattr__(self, "resolution", float(self.resolution))

    @property
    def width(self) -> int:
        return self.cells.shape[1]

    @property
    def height(self) -> int:
        return self.cells.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.cells.shape

    def contains(self, g: GridPoint) -> bool:
        return 0 <= g[0] < self.width and 0 <= g[1] < self.height

    def same_geometry(self, other: "_Grid") -> bool:
        return (self.shape == other.shape and self.resolution == other.resolution
                and self.origin == other.origin)

    def __eq__(self, other):
        if type(self) is not type(other):
            return NotImplemented
        return self.same_geometry(other) and bool(np.array_equal(self.cells, other.cells))

    __hash__ = None


@dataclass(frozen=True, eq=False)
class Costmap(_Grid):
    """Cost values in ``[0, 100]``."""

    def __post_init__(self):
        super().__post_init__()
        cells = np.asarray(self.cells)
        if cells.size and (cells.min() < 0 or cells.max() > 100):
            raise InvalidParameterError("costmap values must lie in [0, 100]")
        object.__setattr__(self, "cells", _frozen(cells, np.uint8))


@dataclass(frozen=True, eq=False)
class BinaryGrid(_Grid):
    """Black-and-white grid: 0 is occupied, 255 is free or unknown."""

    def __post_init__(self):
        super().__post_init__()
        cells = np.asarray(self.cells)
        if not np.isin(cells, (OCCUPIED, FREE)).all():
            raise InvalidParameterError("binary grid values must be 0 or 255")
        object.__setattr__(self, "cells", _frozen(cells, np.uint8))

    @property
    def occupied(self) -> np.ndarray:
        return self.cells == OCCUPIED

    @classmethod
    def from_mask(cls, occupied, resolution, origin=(0.0, 0.0)) -> "BinaryGrid":
        cells = np.where(np.asarray(occupied, dtype=bool), OCCUPIED, FREE).astype(np.uint8)
        return cls(cells, resolution, origin)

    def with_cells(self, cells) -> "BinaryGrid":
        return BinaryGrid(cells, self.resolution, self.origin)


AnyGrid = Union[Costmap, BinaryGrid]


def threshold(costmap: Costmap, thresh: int) -> BinaryGrid:
    """Cells with cost >= ``thresh`` become occupied (0), the rest free (255)."""
    if not 1 <= thresh <= 100:
        raise InvalidParameterError(f"thresh must be in [1, 100], got {thresh}")
    cells = np.where(costmap.cells >= thresh, OCCUPIED, FREE).astype(np.uint8)
    return BinaryGrid(cells, costmap.resolution, costmap.origin)


def world_to_grid(p, grid: AnyGrid) -> GridPoint:
    """Index of the cell containing world point ``p``; may fall outside the grid."""
    x = math.floor((p[0] - grid.origin[0]) / grid.resolution)
    y = math.floor((p[1] - grid.origin[1]) / grid.resolution)
    return GridPoint(x, y)


def grid_to_world(g, grid: AnyGrid) -> WorldPoint:
    """World position of the center of cell ``g``."""
    return WorldPoint(grid.origin[0] + (g[0] + 0.5) * grid.resolution,
                      grid.origin[1] + (g[1] + 0.5) * grid.resolution)


def disk_mask(radius_cells: float) -> np.ndarray:
    """Square boolean mask of cells whose centers lie within ``radius_cells`` of the middle one."""
    n = int(math.floor(radius_cells + 1e-9))
    dy, dx = np.mgrid[-n:n + 1, -n:n + 1]
    return dy * dy + dx * dx <= radius_cells * radius_cells + 1e-9


def inflate(grid: BinaryGrid, radius: float) -> BinaryGrid:
    """Mark every cell within ``radius`` meters (center to center) of an occupied cell."""
    if radius < 0:
        raise InvalidParameterError("inflation radius must be >= 0")
    occ = grid.occupied
    radius_cells = radius / grid.resolution
    if radius_cells < 1.0 - 1e-9 or not occ.any():
        return grid
    grown = ndimage.binary_dilation(occ, structure=disk_mask(radius_cells))
    return BinaryGrid.from_mask(grown, grid.resolution, grid.origin)


# --------------------------------------------------------------------------
# map files: binary PGM (P5) plus a YAML sidecar in the map_server layout

_PGM_TOKEN = re.compile(rb"(?:\s|#[^\n]*\n?)*(\S+)")


def write_pgm(path, pixels: np.ndarray) -> None:
    """Write a uint8 image (image row 0 = top) as a binary P5 graymap."""
    pixels = np.ascontiguousarray(pixels, dtype=np.uint8)
    h, w = pixels.shape
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (w, h))
        fh.write(pixels.tobytes())


def read_pgm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    pos = 0
    fields = []
    for name in ("magic", "width", "height", "maxval"):
        m = _PGM_TOKEN.match(data, pos)
        if m is None:
            raise MapParseError(f"{path}: missing PGM header field '{name}'")
        fields.append(m.group(1))
        pos = m.end()
    magic, *dims = fields
    if magic != b"P5":
        raise MapParseError(f"{path}: PGM field 'magic' is {magic!r}, expected b'P5'")
    values = []
    for name, raw in zip(("width", "height", "maxval"), dims):
        try:
            values.append(int(raw))
        except ValueError:
            raise MapParseError(f"{path}: PGM field '{name}' is not an integer: {raw!r}") from None
    w, h, maxval = values
    if w <= 0 or h <= 0:
        raise MapParseError(f"{path}: PGM fields 'width'/'height' must be positive")
    if not 0 < maxval < 256:
        raise MapParseError(f"{path}: PGM field 'maxval' must be in 1..255, got {maxval}")
    payload = data[pos + 1:]
    if len(payload) != w * h:
        raise MapIntegrityError(
            f"{path}: header declares {w}x{h} = {w * h} pixels but payload holds {len(payload)}")
    pixels = np.frombuffer(payload, dtype=np.uint8).reshape(h, w)
    if maxval != 255:
        pixels = np.round(pixels.astype(float) * 255.0 / maxval).astype(np.uint8)
    return pixels


def grid_to_image(grid: AnyGrid) -> np.ndarray:
    """Flip rows so the world-top row becomes image row 0."""
    return np.flipud(grid.cells)


def save_map(grid: BinaryGrid, path) -> tuple[Path, Path]:
    """Write ``<path>.pgm`` and ``<path>.yaml``; returns both paths."""
    path = Path(path)
    pgm = path.with_suffix(".pgm")
    meta_path = path.with_suffix(".yaml")
    write_pgm(pgm, grid_to_image(grid))
    meta = {
        "image": pgm.name,
        "resolution": grid.resolution,
        "origin": [grid.origin[0], grid.origin[1], 0.0],
        "negate": 0,
        "occupied_thresh": 0.65,
        "free_thresh": 0.196,
    }
    meta_path.write_text(yaml.safe_dump(meta, sort_keys=False))
    return pgm, meta_path


def _meta_float(meta, key, path, default=None):
    if key not in meta:
        if default is not None:
            return default
        raise MapParseError(f"{path}: missing field '{key}'")
    try:
        return float(meta[key])
    except (TypeError, ValueError):
        raise MapParseError(f"{path}: field '{key}' is not a number: {meta[key]!r}") from None


def load_map(path) -> BinaryGrid:
    """Load a map from its YAML sidecar (or the .pgm next to it).

    Pixels are interpreted the way map_server does in trinary mode; unknown
    pixels come back free.
    """
    path = Path(path)
    meta_path = path if path.suffix in (".yaml", ".yml") else path.with_suffix(".yaml")
    try:
        meta = yaml.safe_load(meta_path.read_text())
    except yaml.YAMLError as exc:
        raise MapParseError(f"{meta_path}: invalid YAML ({exc})") from None
    if not isinstance(meta, dict):
        raise MapParseError(f"{meta_path}: expected a key-value document")
    resolution = _meta_float(meta, "resolution", meta_path)
    origin = meta.get("origin")
    if not isinstance(origin, (list, tuple)) or len(origin) < 2:
        raise MapParseError(f"{meta_path}: field 'origin' must be a list [x, y, yaw]")
    try:
        ox, oy = float(origin[0]), float(origin[1])
    except (TypeError, ValueError):
        raise MapParseError(f"{meta_path}: field 'origin' holds non-numeric values") from None
    negate = int(meta.get("negate", 0))
    occ_t = _meta_float(meta, "occupied_thresh", meta_path, 0.65)
    # free and unknown pixels both become 255, so free_thresh is only validated
    _meta_float(meta, "free_thresh", meta_path, 0.196)
    image = meta.get("image", path.with_suffix(".pgm").name)
    image_path = Path(image) if Path(image).is_absolute() else meta_path.parent / image

    pixels = read_pgm(image_path).astype(float)
    p = pixels / 255.0 if negate else (255.0 - pixels) / 255.0
    occupied = p > occ_t
    return BinaryGrid.from_mask(np.flipud(occupied), resolution, (ox, oy))
