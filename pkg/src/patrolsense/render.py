"""Turn a frame-dump directory into PNG images for post-hoc review."""
from __future__ import annotations

import re
from collections import defaultdict
from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw

from .errors import PatrolSenseError
from .evaluation.records import read_rows
from .gridmap import load_map, read_pgm

_PANEL = re.compile(r"r(\d+)_f(\d+)_([ABCD])\.pgm$")
BOX_COLOUR = (220, 30, 30)
GAP = 4


def panel_strip(panels: list[np.ndarray]) -> Image.Image:
    """A, B, C, D side by side, separated by a thin grey gutter; each panel at native size."""
    h = max(p.shape[0] for p in panels)
    w = sum(p.shape[1] for p in panels) + GAP * (len(panels) - 1)
    canvas = Image.new("L", (w, h), 128)
    x = 0
    for p in panels:
        canvas.paste(Image.fromarray(p), (x, 0))
        x += p.shape[1] + GAP
    return canvas


def draw_boxes(image: np.ndarray, boxes, height: int) -> Image.Image:
    """Overlay half-open grid boxes (row 0 = world bottom) on a top-row-first image."""
    rgb = Image.fromarray(image).convert("RGB")
    draw = ImageDraw.Draw(rgb)
    for x1, y1, x2, y2 in boxes:
        draw.rectangle([x1, height - y2, x2 - 1, height - 1 - y1], outline=BOX_COLOUR)
    return rgb


def render_dump(dump_dir, out_dir, frame: int | None = None) -> list[Path]:
    dump_dir, out_dir = Path(dump_dir), Path(out_dir)
    panels = defaultdict(dict)
    for path in sorted(dump_dir.glob("r*_f*_*.pgm")):
        m = _PANEL.match(path.name)
        if m:
            panels[(int(m.group(2)), int(m.group(1)))][m.group(3)] = path
    if frame is not None:
        panels = {k: v for k, v in panels.items() if k[0] == frame}
    if not panels:
        raise PatrolSenseError(f"{dump_dir}: no frame dumps found")
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for (f, rid), files in sorted(panels.items()):
        strip = panel_strip([read_pgm(files[k]) for k in "ABCD" if k in files])
        path = out_dir / f"frame{f:05d}_r{rid}.png"
        strip.save(path)
        written.append(path)

    global_yaml = dump_dir / "global.yaml"
    if global_yaml.exists():
        grid = load_map(global_yaml)
        base = np.flipud(grid.cells)
        boxes = defaultdict(list)
        det_csv = dump_dir / "detections.csv"
        if det_csv.exists():
            for row in read_rows(det_csv):
                boxes[int(row["frame"])].append(
                    tuple(int(row[k]) for k in ("box_x1", "box_y1", "box_x2", "box_y2")))
        for f in sorted({k[0] for k in panels}):
            path = out_dir / f"frame{f:05d}_global.png"
            draw_boxes(base, boxes.get(f, []), grid.height).save(path)
            written.append(path)
    return written
