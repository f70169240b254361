"""Command-line front end: ``dpoint train|eval|sweep|trace|replay|rerun``.

Exit codes: 0 success, 1 usage error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .experiments import (
    TEST_PHASE,
    ExperimentConfig,
    episode_rngs,
    evaluate_hit_rate,
    records_to_csv,
    run_training,
    sweep,
)
from .learning import DEFAULT_GAMMA, Mode, QTable, VariantMismatch, get_variant
from .replay import TraceError, parse_trace, render_replay
from .svg import line_plot
from .world import EpisodeMode, PlacementFailure, ScenarioConfig, Trace, generate_scenario, run_episode

log = logging.getLogger("dpoint")

SWEEP_FLAGS = {"train": "n_train", "radius": "r_ns", "obstacles": "n_obstacles"}
SWEEP_LABELS = {
    "n_train": "training scenarios",
    "r_ns": "non-safe radius",
    "n_obstacles": "obstacles",
}
# Ranges the planner was characterised over; values outside only warn.
CHARACTERISED_RANGES = {
    "radius": (3.7, 6.2),
    "obstacles": (5, 30),
    "episodes": (0, 50),
}
MANIFEST = "manifest.json"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _default_seed() -> int:
    raw = os.environ.get("DPOINT_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"DPOINT_SEED must be an integer, got {raw!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated number list: {text!r}") from None


def _add_scenario_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("scenario")
    g.add_argument("--obstacles", type=int, default=15, help="number of obstacles")
    g.add_argument("--radius", type=float, default=4.7, help="non-safe area radius")
    g.add_argument("--r-body", type=float, default=1.0, help="obstacle collision radius")
    g.add_argument("--r-capture", type=float, default=2.0, help="goal capture radius")
    g.add_argument("--fps", type=int, default=50)
    g.add_argument("--max-frames", type=int, default=6000)
    g.add_argument("--static", action="store_true", help="freeze obstacles and target")
    g.add_argument("--seed", type=int, default=None, help="master seed (default $DPOINT_SEED or 0)")
    g.add_argument("--gamma", type=float, default=DEFAULT_GAMMA)
    g.add_argument("--method", choices=("dpoint", "opponent"), default="dpoint")
    g.add_argument("--train-policy", choices=("random", "heuristic"), default="random")
    g.add_argument("--jobs", type=int, default=1, help="parallel evaluation processes")
    g.add_argument("--config", type=Path, default=None, help="key=value file; flags override it")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dpoint", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("train", help="train a Q-table")
    _add_scenario_flags(p)
    p.add_argument("--episodes", type=int, default=50, help="training scenarios")
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("eval", help="hit rate of a trained Q-table")
    _add_scenario_flags(p)
    p.add_argument("--qtable", type=Path, required=True)
    p.add_argument("--tests", type=int, default=500)
    p.add_argument("--out", type=Path, default=Path("eval"))

    p = sub.add_parser("sweep", help="train+evaluate both methods across a parameter grid")
    _add_scenario_flags(p)
    p.add_argument("--param", required=True, help="train, radius or obstacles")
    p.add_argument("--values", type=_float_list, required=True)
    p.add_argument("--seeds", type=int, default=1, help="master seeds seed..seed+K-1")
    p.add_argument("--episodes", type=int, default=50, help="training scenarios when not swept")
    p.add_argument("--tests", type=int, default=500)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("trace", help="run one test episode and write its trace")
    _add_scenario_flags(p)
    p.add_argument("--qtable", type=Path, default=None, help="omit for an all-zero table")
    p.add_argument("--episode", type=int, default=0)
    p.add_argument("--out", type=Path, required=True, help="trace file path")

    p = sub.add_parser("replay", help="render a trace as numbered SVG frames")
    p.add_argument("--trace", type=Path, required=True)
    p.add_argument("--frames", type=int, default=6)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("rerun", help="re-execute the command recorded in a manifest")
    p.add_argument("manifest", type=Path)
    p.add_argument("--out", type=Path, default=None, help="new output location")
    return parser


def _read_config_file(path: Path) -> dict[str, str]:
    values = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def parse_args(argv: Optional[Sequence[str]]) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    cfg_path = getattr(args, "config", None)
    if cfg_path is not None:
        file_values = _read_config_file(cfg_path)
        sub = parser._subparsers._group_actions[0].choices[args.command]  # type: ignore[union-attr]
        known = {a.dest for a in sub._actions}
        unknown = set(file_values) - known
        if unknown:
            raise UsageError(f"{cfg_path}: unknown keys {sorted(unknown)}")
        sub.set_defaults(**file_values)
        args = parser.parse_args(argv)
        # set_defaults bypasses type conversion
        for action in sub._actions:
            value = getattr(args, action.dest, None)
            if action.dest in file_values and isinstance(value, str) and action.type is not None:
                try:
                    setattr(args, action.dest, action.type(value))
                except (ValueError, argparse.ArgumentTypeError) as exc:
                    raise UsageError(f"{cfg_path}: bad value for {action.dest}: {exc}") from None
            elif action.dest in file_values and isinstance(value, str) and action.const is True:
                setattr(args, action.dest, value.lower() in ("1", "true", "yes"))
    if getattr(args, "seed", "absent") is None:
        args.seed = _default_seed()
    return args


def _warn_ranges(args: argparse.Namespace) -> None:
    for name, (lo, hi) in CHARACTERISED_RANGES.items():
        value = getattr(args, name, None)
        if value is not None and not lo <= value <= hi:
            log.warning("%s=%s is outside the characterised range [%s, %s]", name, value, lo, hi)


def experiment_config(args: argparse.Namespace, **overrides) -> ExperimentConfig:
    if args.obstacles < 0 or args.radius <= 0 or args.fps <= 0 or args.max_frames <= 0:
        raise UsageError("obstacles must be >= 0; radius, fps and max-frames must be positive")
    if not 0.0 <= args.gamma < 1.0:
        raise UsageError("gamma must be in [0, 1)")
    _warn_ranges(args)
    scenario = ScenarioConfig(
        n_obstacles=args.obstacles,
        r_ns=args.radius,
        r_body=args.r_body,
        r_capture=args.r_capture,
        fps=args.fps,
        max_frames=args.max_frames,
        static=args.static,
    )
    cfg = ExperimentConfig(
        method=args.method,
        n_train=getattr(args, "episodes", 0),
        n_test=getattr(args, "tests", 0),
        scenario=scenario,
        master_seed=args.seed,
        train_policy=Mode(args.train_policy),
        gamma=args.gamma,
        jobs=max(1, args.jobs),
    )
    return replace(cfg, **overrides)


def _write_manifest(out_dir: Path, args: argparse.Namespace, config: Optional[ExperimentConfig]) -> None:
    flags = {k: (str(v) if isinstance(v, Path) else v) for k, v in vars(args).items()}
    manifest = {
        "command": args.command,
        "args": flags,
        "config": config.to_dict() if config else None,
        "tool_version": __version__,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "master_seed": getattr(args, "seed", None),
    }
    (out_dir / MANIFEST).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def cmd_train(args: argparse.Namespace) -> int:
    if args.episodes < 0:
        raise UsageError("--episodes must be non-negative")
    cfg = experiment_config(args)
    args.out.mkdir(parents=True, exist_ok=True)
    table, curve = run_training(cfg)
    table.save(args.out / "qtable.txt", cfg.gamma)
    (args.out / "rewards.csv").write_text(curve.to_csv())
    _write_manifest(args.out, args, cfg)
    log.info("trained %s on %d scenarios -> %s", cfg.method, cfg.n_train, args.out)
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    if args.tests < 0:
        raise UsageError("--tests must be non-negative")
    table, _ = QTable.load(args.qtable, args.method)
    cfg = experiment_config(args, n_train=0)
    args.out.mkdir(parents=True, exist_ok=True)
    rec = evaluate_hit_rate(table, cfg)
    csv_path = args.out / "results.csv"
    new = not csv_path.exists()
    with open(csv_path, "a") as fh:
        fh.write(records_to_csv([rec], header=new))
    _write_manifest(args.out, args, cfg)
    print(f"{rec.method}: {rec.hits}/{rec.n_test} hits (hit rate {rec.hit_rate:.4f})")
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    if args.param not in SWEEP_FLAGS:
        raise UsageError(f"--param must be one of {sorted(SWEEP_FLAGS)}, got {args.param!r}")
    if args.seeds < 1:
        raise UsageError("--seeds must be at least 1")
    param = SWEEP_FLAGS[args.param]
    values = tuple(int(v) if param != "r_ns" else v for v in args.values)
    base = experiment_config(args, method="both", sweep=(param, values))
    args.out.mkdir(parents=True, exist_ok=True)
    records = []
    for k in range(args.seeds):
        records.extend(sweep(replace(base, master_seed=base.master_seed + k)))
    (args.out / "results.csv").write_text(records_to_csv(records))
    series = {}
    for method in base.methods:
        ys = []
        for v in values:
            rates = [r.hit_rate for r in records if r.method == method and r.param_value == v]
            ys.append(sum(rates) / len(rates))
        series[method] = (list(map(float, values)), ys)
    svg = line_plot(
        series,
        title=f"hit rate vs {SWEEP_LABELS[param]}",
        xlabel=SWEEP_LABELS[param],
        ylabel="hit rate",
    )
    (args.out / f"hit_rate_vs_{param}.svg").write_text(svg)
    _write_manifest(args.out, args, base)
    return 0


def cmd_trace(args: argparse.Namespace) -> int:
    cfg = experiment_config(args)
    if args.qtable is not None:
        table, _ = QTable.load(args.qtable, args.method)
    else:
        table = QTable(get_variant(args.method))
    scene_rng, _ = episode_rngs(cfg.master_seed, TEST_PHASE, args.episode)
    world = generate_scenario(cfg.scenario, scene_rng)
    trace = Trace(
        {
            "method": table.variant.name,
            "master_seed": cfg.master_seed,
            "phase": TEST_PHASE,
            "episode": args.episode,
            "scenario": json.dumps(cfg.scenario.to_dict(), sort_keys=True),
        }
    )
    out = run_episode(world, table, EpisodeMode.TEST, trace=trace)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    trace.write(args.out)
    print(f"{out.kind.value} after {out.frames_elapsed} frames")
    return 0


def cmd_replay(args: argparse.Namespace) -> int:
    if args.frames < 0:
        raise UsageError("--frames must be non-negative")
    docs = render_replay(parse_trace(args.trace), args.frames)
    args.out.mkdir(parents=True, exist_ok=True)
    for i, doc in enumerate(docs):
        (args.out / f"frame_{i:03d}.svg").write_text(doc)
    log.info("wrote %d frames to %s", len(docs), args.out)
    return 0


def cmd_rerun(args: argparse.Namespace) -> int:
    manifest = json.loads(args.manifest.read_text())
    recorded = dict(manifest["args"])
    for key in ("out", "qtable", "trace", "config"):
        if recorded.get(key) is not None:
            recorded[key] = Path(recorded[key])
    if args.out is not None:
        recorded["out"] = args.out
    recorded["config"] = None
    return COMMANDS[manifest["command"]](argparse.Namespace(**recorded))


COMMANDS = {
    "train": cmd_train,
    "eval": cmd_eval,
    "sweep": cmd_sweep,
    "trace": cmd_trace,
    "replay": cmd_replay,
    "rerun": cmd_rerun,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = parse_args(argv)
    except UsageError as exc:
        print(f"dpoint: error: {exc}", file=sys.stderr)
        return 1
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"dpoint: error: {exc}", file=sys.stderr)
        return 1
    except (VariantMismatch, TraceError, PlacementFailure, OSError, ValueError) as exc:
        print(f"dpoint: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
