"""A small escape-and-capture campaign on the 20 m arena with two doors.

Intruders spawn inside and head for a door at least 12 m away; robots start
in the middle, patrol, and chase whatever the fused detections show.
Writes campaign.csv, campaign_mean.csv and campaign.svg to ./labyrinth_demo.
"""
from pathlib import Path

from patrolsense.config import RunConfig
from patrolsense.evaluation.experiments import plot_campaign, run_labyrinth_campaign

out = Path("labyrinth_demo")
cfg = RunConfig(map="map2", robots=[1, 3, 5], intruders=[3], trials=3, seed=11)
cells, trials = run_labyrinth_campaign(cfg, out, progress=lambda t: print(
    f"  {t.n_robots} robot(s), trial {t.trial}: caught {t.caught}/{t.total} in {t.sim_time:.0f} s"))
plot_campaign(cells, out / "campaign.svg")
for (ni, nr), cell in sorted(cells.items()):
    print(f"{ni} intruders, {nr} robots: mean success {cell.mean_success:.1f}%")
print("outputs in", out.resolve())
