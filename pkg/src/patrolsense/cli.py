"""``patrolsense`` command line: map export, detection trials, labyrinth campaigns, dump rendering."""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .config import RunConfig, load_config, parse_int_list
from .errors import InvalidParameterError, PatrolSenseError
from .gridmap import load_map, save_map

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2

# flag name -> RunConfig field; None values mean "not given on the command line"
_OVERRIDES = {
    "seed": "seed", "out": "out", "resolution": "resolution", "thresh_local": "thresh_local",
    "thresh_global": "thresh_global", "iou_threshold": "iou_threshold",
    "capture_radius": "capture_radius", "dump_frames": "dump_frames", "jobs": "jobs",
    "map": "map", "robots": "robots", "intruders": "intruders", "frames": "frames",
    "duration": "duration", "trials": "trials", "time_cap": "time_cap",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise InvalidParameterError(message)


def _shared(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--config", help="YAML key-value run configuration")
    p.add_argument("--resolution", type=float)
    p.add_argument("--thresh-local", type=int)
    p.add_argument("--thresh-global", type=int)
    p.add_argument("--iou-threshold", type=float)
    p.add_argument("--capture-radius", type=float)
    p.add_argument("--dump-frames")
    p.add_argument("--jobs", type=int)
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="patrolsense", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("map", help="export a prior map and its inflated variant")
    p.add_argument("--name", default="map1", help="map1, map2, or a map .yaml to re-export")
    _shared(p)

    p = sub.add_parser("detect", help="run one detection trial and score it")
    p.add_argument("--map")
    p.add_argument("--robots", type=int)
    p.add_argument("--intruders", type=int)
    length = p.add_mutually_exclusive_group()
    length.add_argument("--frames", type=int)
    length.add_argument("--duration", type=float, help="simulated seconds")
    _shared(p)

    p = sub.add_parser("labyrinth", help="run the escape-and-capture campaign")
    p.add_argument("--robots", type=parse_int_list, help="e.g. 1..5 or 1,3,5")
    p.add_argument("--intruders", type=parse_int_list)
    p.add_argument("--trials", type=int)
    p.add_argument("--time-cap", type=float)
    _shared(p)

    p = sub.add_parser("render", help="compose images from a --dump-frames directory")
    p.add_argument("dump_dir")
    p.add_argument("--frame", type=int, help="only this frame (default: all)")
    _shared(p)
    return parser


def resolve_config(args, **defaults) -> RunConfig:
    cfg = load_config(args.config) if getattr(args, "config", None) else RunConfig(**defaults)
    given = {field: getattr(args, flag) for flag, field in _OVERRIDES.items()
             if getattr(args, flag, None) is not None}
    if "frames" in given or "duration" in given:
        cfg = replace(cfg, frames=None, duration=None)
    return replace(cfg, **given)


def _announce_seed(cfg: RunConfig, out: Path):
    had_seed = cfg.seed is not None
    seed = cfg.ensure_seed()
    if not had_seed:
        print(f"seed: {seed}")
    out.mkdir(parents=True, exist_ok=True)
    cfg.dump(out / "config.yaml")


def cmd_map(args) -> int:
    from .sim.world import make_map1, make_map2, make_world_from_grid

    if args.name not in ("map1", "map2") and Path(args.name).suffix not in (".yaml", ".yml"):
        raise InvalidParameterError(f"unknown map {args.name!r}: expected map1, map2 or a .yaml path")
    cfg = resolve_config(args)
    out = Path(cfg.out)
    _announce_seed(cfg, out)
    if args.name == "map1":
        world = make_map1(cfg.resolution, cfg.seed, cfg.global_inflation, thresh=cfg.thresh_global)
    elif args.name == "map2":
        world = make_map2(cfg.resolution, cfg.seed, cfg.door_width, cfg.global_inflation,
                          thresh=cfg.thresh_global)
    else:
        world = make_world_from_grid(load_map(args.name), cfg.seed, cfg.global_inflation,
                                     name=Path(args.name).stem)
    stem = Path(args.name).stem
    for path in (*save_map(world.prior, out / stem), *save_map(world.inflated_prior, out / f"{stem}_inflated")):
        print(path)
    return EXIT_OK


def _fmt(v, digits=3):
    return "-" if v is None else f"{v:.{digits}f}"


def cmd_detect(args) -> int:
    from .evaluation.experiments import run_detection_trial

    cfg = resolve_config(args)
    if cfg.frames is None and cfg.duration is None:
        cfg = replace(cfg, frames=500)
    cfg.validate(detection=True)
    out = Path(cfg.out)
    _announce_seed(cfg, out)
    if cfg.dump_frames and not Path(cfg.dump_frames).is_absolute():
        cfg = replace(cfg, dump_frames=str(out / cfg.dump_frames))
    m = run_detection_trial(cfg, out)
    print(f"{'trial':>5} {'tp':>7} {'fp':>7} {'fn':>7} {'precision':>9} {'recall':>7} {'f1':>7} {'frames':>7}")
    label = f"{cfg.robots[0]}R"
    print(f"{label:>5} {m.tp:>7} {m.fp:>7} {m.fn:>7} {_fmt(m.precision):>9} {_fmt(m.recall):>7} "
          f"{_fmt(m.f1):>7} {m.frames_observed:>7}")
    return EXIT_OK


def cmd_labyrinth(args) -> int:
    from .evaluation.experiments import plot_campaign, run_labyrinth_campaign

    cfg = resolve_config(args, map="map2", robots=[1, 2, 3, 4, 5], intruders=[1, 2, 3, 4, 5])
    if cfg.map == "map1":
        cfg = replace(cfg, map="map2")
    cfg.validate()
    out = Path(cfg.out)
    _announce_seed(cfg, out)
    cells, _ = run_labyrinth_campaign(cfg, out)
    plot_campaign(cells, out / "campaign.svg")
    print("mean success (%) rows: intruders, columns: robots")
    print("      " + "".join(f"{r:>8}" for r in cfg.robots))
    for ni in cfg.intruders:
        print(f"{ni:>6}" + "".join(f"{cells[(ni, nr)].mean_success:>8.1f}" for nr in cfg.robots))
    return EXIT_OK


def cmd_render(args) -> int:
    from .render import render_dump

    dump = Path(args.dump_dir)
    if not dump.is_dir():
        raise FileNotFoundError(f"dump directory {dump} does not exist")
    out = Path(args.out) if args.out else dump / "render"
    written = render_dump(dump, out, args.frame)
    for path in written:
        print(path)
    return EXIT_OK


COMMANDS = {"map": cmd_map, "detect": cmd_detect, "labyrinth": cmd_labyrinth, "render": cmd_render}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except InvalidParameterError as exc:
        print(f"patrolsense: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except InvalidParameterError as exc:
        print(f"patrolsense: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (PatrolSenseError, OSError) as exc:
        print(f"patrolsense: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
