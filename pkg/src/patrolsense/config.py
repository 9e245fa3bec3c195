"""Run configuration: a flat key-value YAML document plus CLI overrides."""
from __future__ import annotations

import secrets
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional

import yaml

from .errors import InvalidParameterError
from .fusion import DEFAULT_IOU_THRESHOLD, DEFAULT_ROBOT_DIAMETER
from .gridmap import DEFAULT_RESOLUTION, GLOBAL_THRESH, LOCAL_THRESH
from .sim.arena import DOOR_WIDTH, GLOBAL_INFLATION
from .sim.sensor import LOCAL_INFLATION
from .sim.world import CAPTURE_RADIUS, DT, INTRUDER_SPEED, PURSUIT_TIMEOUT, ROBOT_SPEED


@dataclass
class RunConfig:
    map: str = "map1"
    robots: list = field(default_factory=lambda: [1])
    intruders: list = field(default_factory=lambda: [8])
    mobile_intruders: Optional[int] = None  # map1 only; None -> all but 3
    intruder_radius: float = 0.1
    box_side_min: float = 0.5
    box_side_max: float = 1.0
    robot_positions: Optional[list] = None
    intruder_positions: Optional[list] = None
    frames: Optional[int] = None
    duration: Optional[float] = None
    trials: int = 20
    time_cap: float = 240.0
    resolution: float = DEFAULT_RESOLUTION
    dt: float = DT
    robot_speed: float = ROBOT_SPEED
    intruder_speed: float = INTRUDER_SPEED
    beams: int = 360
    max_range: float = 2.5
    rate: float = 5.0
    noise_sigma: float = 0.0
    thresh_local: int = LOCAL_THRESH
    thresh_global: int = GLOBAL_THRESH
    iou_threshold: float = DEFAULT_IOU_THRESHOLD
    robot_diameter: float = DEFAULT_ROBOT_DIAMETER
    local_inflation: float = LOCAL_INFLATION
    global_inflation: float = GLOBAL_INFLATION
    min_blob_cells: int = 1
    capture_radius: float = CAPTURE_RADIUS
    pursuit_timeout: float = PURSUIT_TIMEOUT
    door_width: float = DOOR_WIDTH
    escape_distance: float = 12.0
    seed: Optional[int] = None
    out: str = "out"
    dump_frames: Optional[str] = None
    jobs: int = 1

    def __post_init__(self):
        self.robots = _as_int_list(self.robots, "robots")
        self.intruders = _as_int_list(self.intruders, "intruders")

    def validate(self, detection: bool = False) -> "RunConfig":
        if any(n < 0 for n in self.robots + self.intruders):
            raise InvalidParameterError("robot and intruder counts must be >= 0")
        if detection:
            if (self.frames is None) == (self.duration is None):
                raise InvalidParameterError("exactly one of frames/duration must be set")
            if self.frames is not None and self.frames < 1:
                raise InvalidParameterError(f"frames must be >= 1, got {self.frames}")
            if self.duration is not None and not self.duration > 0:
                raise InvalidParameterError("duration must be > 0")
        if self.trials < 1:
            raise InvalidParameterError("trials must be >= 1")
        if not 1 <= self.thresh_local <= 100 or not 1 <= self.thresh_global <= 100:
            raise InvalidParameterError("thresholds must lie in [1, 100]")
        if not 0 < self.iou_threshold <= 1:
            raise InvalidParameterError("iou threshold must lie in (0, 1]")
        if self.capture_radius < 0:
            raise InvalidParameterError("capture radius must be >= 0")
        if not self.dt > 0 or not self.resolution > 0:
            raise InvalidParameterError("dt and resolution must be > 0")
        if self.jobs < 1:
            raise InvalidParameterError("jobs must be >= 1")
        return self

    def ensure_seed(self) -> int:
        if self.seed is None:
            self.seed = secrets.randbelow(2**31)
        return self.seed

    def n_frames(self) -> int:
        if self.frames is not None:
            return self.frames
        return max(1, int(round(self.duration * self.rate)))

    def to_dict(self) -> dict:
        return asdict(self)

    def dump(self, path) -> Path:
        path = Path(path)
        path.write_text(yaml.safe_dump(self.to_dict(), sort_keys=True))
        return path


def _as_int_list(value, name) -> list:
    if isinstance(value, int):
        return [value]
    if isinstance(value, str):
        return parse_int_list(value)
    try:
        return [int(v) for v in value]
    except (TypeError, ValueError):
        raise InvalidParameterError(f"{name}: expected an integer or a list, got {value!r}") from None


def parse_int_list(text: str) -> list:
    """``"3"``, ``"1,3,5"`` or ``"1..5"`` -> list of ints."""
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        try:
            if ".." in part:
                lo, hi = part.split("..", 1)
                out.extend(range(int(lo), int(hi) + 1))
            else:
                out.append(int(part))
        except ValueError:
            raise InvalidParameterError(f"cannot parse integer list {text!r}") from None
    if not out:
        raise InvalidParameterError(f"empty integer list {text!r}")
    return out


def load_config(path) -> RunConfig:
    try:
        data = yaml.safe_load(Path(path).read_text()) or {}
    except (OSError, yaml.YAMLError) as exc:
        raise InvalidParameterError(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise InvalidParameterError(f"config {path} must be a key-value document")
    known = {f.name for f in fields(RunConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise InvalidParameterError(f"unknown config keys: {', '.join(unknown)}")
    return RunConfig(**data)
