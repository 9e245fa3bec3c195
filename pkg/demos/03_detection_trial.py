"""Short detection trials on the 6 m enclosure with one robot and with five.

Eight intruders (five wandering discs, three parked boxes) share the arena.
A larger team sees around the boxes more often, so misses drop.
Pass a frame count as the first argument for a longer run (default 150).
"""
import sys

from patrolsense.config import RunConfig
from patrolsense.evaluation.experiments import run_detection_trial

frames = int(sys.argv[1]) if len(sys.argv) > 1 else 150
print(f"{'robots':>6} {'tp':>6} {'fp':>5} {'fn':>5} {'precision':>9} {'recall':>7} {'f1':>6}")
for n in (1, 5):
    m = run_detection_trial(RunConfig(map="map1", robots=[n], intruders=[8], frames=frames, seed=0))
    print(f"{n:>6} {m.tp:>6} {m.fp:>5} {m.fn:>5} {m.precision:>9.3f} {m.recall:>7.3f} {m.f1:>6.3f}")
