"""CSV writers for frame scores, fused detections, events and campaigns."""
from __future__ import annotations

import csv
from pathlib import Path


def fmt(value) -> str:
    """Undefined metrics render as empty fields, never as 0."""
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def _write(path, header, rows):
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])
    return path


def write_frame_scores(path, metrics):
    from .metrics import f1, precision, recall
    rows = []
    for s in metrics.frames:
        p, r = precision(s.tp, s.fp), recall(s.tp, s.fn)
        rows.append([s.frame, s.tp, s.fp, s.fn, p, r, f1(p, r)])
    rows.append(["total", metrics.tp, metrics.fp, metrics.fn, metrics.precision, metrics.recall, metrics.f1])
    return _write(path, ["frame", "tp", "fp", "fn", "precision", "recall", "f1"], rows)


def write_detections(path, records):
    """``records``: iterable of Detection."""
    rows = [[d.frame, *d.box.as_tuple(), d.source_robot] for d in records]
    return _write(path, ["frame", "box_x1", "box_y1", "box_x2", "box_y2", "source_robot"], rows)


def write_events(path, events):
    return _write(path, ["t", "event_type", "entity_id", "x", "y"], events)


def write_campaign(path, trials):
    rows = [[t.n_intruders, t.n_robots, t.trial, t.seed, t.caught, t.total, t.success_rate] for t in trials]
    return _write(path, ["n_intruders", "n_robots", "trial", "seed", "caught", "total", "success_rate"], rows)


def write_campaign_means(path, cells):
    rows = [[c.n_intruders, c.n_robots, c.trials, c.mean_success] for c in cells]
    return _write(path, ["n_intruders", "n_robots", "trials", "mean_success"], rows)


def read_rows(path) -> list[dict]:
    with Path(path).open(newline="") as fh:
        return list(csv.DictReader(fh))
