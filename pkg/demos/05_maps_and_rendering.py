"""Export both prior maps, dump a few frames and render them through the CLI entry point."""
from pathlib import Path

from patrolsense.cli import main

out = Path("render_demo")
main(["map", "--name", "map1", "--seed", "0", "--out", str(out / "maps")])
main(["map", "--name", "map2", "--seed", "0", "--out", str(out / "maps")])
main(["detect", "--robots", "3", "--intruders", "8", "--frames", "5", "--seed", "0",
      "--out", str(out / "run"), "--dump-frames", "dump"])
main(["render", str(out / "run" / "dump"), "--out", str(out / "images")])
