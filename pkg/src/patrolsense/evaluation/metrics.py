"""Per-frame scoring and detection metrics."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from ..errors import InvalidParameterError


@dataclass(frozen=True)
class FrameScore:
    frame: int
    tp: int
    fp: int
    fn: int


def _box(d):
    return d.box if hasattr(d, "box") else d


def frame_score(fused: Sequence, truth: Sequence, in_range: Sequence[bool], frame: int = 0) -> FrameScore:
    """Score fused boxes against ground-truth intruder boxes.

    A fused box is a true positive when it overlaps any truth box by at least
    one cell; a false negative is an in-range intruder that no fused box touches.
    """
    boxes = [_box(d) for d in fused]
    tp = sum(1 for b in boxes if any(b.intersects(t) for t in truth))
    fn = sum(1 for t, seen in zip(truth, in_range)
             if seen and not any(b.intersects(t) for b in boxes))
    return FrameScore(frame, tp, len(boxes) - tp, fn)


def precision(tp: int, fp: int) -> Optional[float]:
    return tp / (tp + fp) if tp + fp > 0 else None


def recall(tp: int, fn: int) -> Optional[float]:
    return tp / (tp + fn) if tp + fn > 0 else None


def f1(p: Optional[float], r: Optional[float]) -> Optional[float]:
    if p is None or r is None or p + r == 0:
        return None
    return 2 * p * r / (p + r)


def success_rate(caught: int, total: int) -> float:
    if total <= 0:
        raise InvalidParameterError("total number of intruders must be > 0")
    if not 0 <= caught <= total:
        raise InvalidParameterError(f"caught={caught} outside [0, {total}]")
    return 100.0 * caught / total


@dataclass
class TrialMetrics:
    frames_observed: int = 0
    tp: int = 0
    fp: int = 0
    fn: int = 0
    frames: list = field(default_factory=list)

    def add(self, score: FrameScore):
        self.frames.append(score)
        self.frames_observed += 1
        self.tp += score.tp
        self.fp += score.fp
        self.fn += score.fn

    @property
    def precision(self):
        return precision(self.tp, self.fp)

    @property
    def recall(self):
        return recall(self.tp, self.fn)

    @property
    def f1(self):
        return f1(self.precision, self.recall)
