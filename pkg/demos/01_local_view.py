"""Walk one robot's local view through the background-subtraction steps.

A tiny 40 x 40 arena has a wall on its left edge. The live view A contains
that wall plus a small unknown blob; the prior B contains only the wall.
OR-ing them gives C, and |A - C| leaves exactly the blob in D.
"""
import numpy as np

from patrolsense.gridmap import BinaryGrid
from patrolsense.localview import process_frame


def show(name, grid):
    print(f"{name}:")
    rows = np.flipud(grid.cells[14:27, 0:32])  # world-top row printed first
    for row in rows:
        print("   " + "".join("#" if v == 0 else "." for v in row))


prior = np.zeros((40, 40), bool)
prior[:, :2] = True
live = prior.copy()
live[19:22, 26:28] = True  # something the prior map does not know about

frame = process_frame(BinaryGrid.from_mask(live, 0.05), BinaryGrid.from_mask(prior, 0.05), (1.0, 1.0))

# In A/B/C '#' is occupied; in D the 255 cells ('.') are the foreground.
for name in "ABCD":
    show(name, getattr(frame, name))
print("crop window:", frame.window)
print("boxes (global cells, half-open):", [b.as_tuple() for b in frame.boxes])
