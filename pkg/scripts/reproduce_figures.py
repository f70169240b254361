"""Seed-averaged comparison of the two planners, written as CSV and SVG.

    python scripts/reproduce_figures.py --out figures
    python scripts/reproduce_figures.py --out quick --seeds 2 --tests 100 --windows 5

Produces hit rate vs. training scenarios, hit count vs. obstacles, hit rate vs.
non-safe radius (with --radius-sweep) and the normalized reward curves.
"""

from __future__ import annotations

import argparse
import logging
from pathlib import Path

import numpy as np

from dpoint.experiments import METHODS, ExperimentConfig, records_to_csv, sweep
from dpoint.harness import OBSTACLE_GRID, R_NS_GRID, HarnessConfig, run_harness
from dpoint.learning import Mode
from dpoint.svg import line_plot


def _mean_sd(values) -> tuple[float, float]:
    a = np.asarray(values, dtype=float)
    return float(a.mean()), float(a.std(ddof=1)) if len(a) > 1 else 0.0


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("figures"))
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--tests", type=int, default=500)
    ap.add_argument("--windows", type=int, default=20, help="reward windows per curve")
    ap.add_argument("--train-policy", choices=("random", "heuristic"), default="heuristic")
    ap.add_argument("--full-obstacle-grid", action="store_true")
    ap.add_argument("--radius-sweep", action="store_true")
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")

    cfg = HarnessConfig(
        seeds=tuple(range(args.seeds)),
        n_test=args.tests,
        curve_windows=args.windows,
        train_policy=Mode(args.train_policy),
        obstacle_grid=OBSTACLE_GRID if args.full_obstacle_grid else (5, 30),
        jobs=args.jobs,
    )
    res = run_harness(cfg)
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    (out / "hit_rate_vs_n_train.csv").write_text(records_to_csv(res.n_train_records))
    (out / "hits_vs_n_obstacles.csv").write_text(records_to_csv(res.obstacle_records))

    series = {m: (list(cfg.n_train_grid), [res.mean_hit_rate(m)[n] for n in cfg.n_train_grid]) for m in METHODS}
    (out / "hit_rate_vs_n_train.svg").write_text(
        line_plot(series, "hit rate vs training scenarios", "training scenarios", "hit rate")
    )
    series = {
        m: (list(cfg.obstacle_grid), [float(res.hits_at(m, k).mean()) for k in cfg.obstacle_grid])
        for m in METHODS
    }
    (out / "hits_vs_n_obstacles.svg").write_text(
        line_plot(series, f"hits out of {cfg.n_test} vs obstacles", "obstacles", "hits")
    )
    curves = {m: res.mean_curve(m) for m in METHODS}
    lines = ["window_index," + ",".join(METHODS)]
    for i in range(len(curves["dpoint"])):
        lines.append(f"{i}," + ",".join(repr(float(curves[m][i])) for m in METHODS))
    (out / "reward_curves.csv").write_text("\n".join(lines) + "\n")
    idx = list(range(len(curves["dpoint"])))
    (out / "reward_curves.svg").write_text(
        line_plot(
            {m: (idx, curves[m].tolist()) for m in METHODS},
            "normalized cumulative reward",
            "window of 100 rewarding steps",
            "normalized cumulative reward",
            ylim=(0.0, 1.0),
        )
    )

    if args.radius_sweep:
        records = []
        for seed in cfg.seeds:
            base = ExperimentConfig(
                method="both", n_test=cfg.n_test, master_seed=seed,
                train_policy=cfg.train_policy, sweep=("r_ns", R_NS_GRID), jobs=cfg.jobs,
            )
            records += sweep(base)
        (out / "hit_rate_vs_r_ns.csv").write_text(records_to_csv(records))
        series = {
            m: (list(R_NS_GRID), [float(np.mean([r.hit_rate for r in records if r.method == m and r.param_value == v])) for v in R_NS_GRID])
            for m in METHODS
        }
        (out / "hit_rate_vs_r_ns.svg").write_text(
            line_plot(series, "hit rate vs non-safe radius", "non-safe radius", "hit rate")
        )

    print(f"{len(cfg.seeds)} seeds, {cfg.n_test} tests, {cfg.train_policy.value} training, {res.seconds:.0f} s")
    for m in METHODS:
        n, best = res.best_n_train(m)
        mean, sd = _mean_sd(res.hit_rates(m, n))
        print(f"{m:9s} best n_train={n:2d} hit rate {mean:.4f} ± {sd:.4f}; "
              f"obstacle drop {res.obstacle_drop(m):.1f}")
    d, o = curves["dpoint"], curves["opponent"]
    print(f"reward curve: D-point >= opponent in {np.mean(d[1:] >= o[1:]):.0%} of windows after the first")


if __name__ == "__main__":
    main()
