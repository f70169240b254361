"""Seed-averaged comparison runs shared by the acceptance suite and ``scripts/``."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .experiments import METHODS, ExperimentConfig, MetricsRecord, reward_curve_by_steps, sweep
from .learning import Mode
from .world import ScenarioConfig

log = logging.getLogger(__name__)

N_TRAIN_GRID = (0, 10, 20, 30, 40, 50)
R_NS_GRID = (3.7, 4.2, 4.7, 5.2, 5.7, 6.2)
OBSTACLE_GRID = (5, 10, 15, 20, 25, 30)


@dataclass
class HarnessConfig:
    seeds: tuple[int, ...] = tuple(range(10))
    n_test: int = 500
    n_train: int = 50  # used where n_train is not the swept parameter
    n_train_grid: tuple[int, ...] = N_TRAIN_GRID
    obstacle_grid: tuple[int, ...] = (5, 30)
    curve_windows: int = 20
    train_policy: Mode = Mode.EXPLORE_HEURISTIC
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    jobs: int = 1


@dataclass
class HarnessResult:
    config: HarnessConfig
    n_train_records: list[MetricsRecord] = field(default_factory=list)
    obstacle_records: list[MetricsRecord] = field(default_factory=list)
    curves: dict[str, list[list[float]]] = field(default_factory=dict)
    raw_curves: dict[str, list[list[float]]] = field(default_factory=dict)
    curve_episodes: dict[str, list[int]] = field(default_factory=dict)
    seconds: float = 0.0

    def hit_rates(self, method: str, n_train: int) -> np.ndarray:
        """Per-seed hit rates from the n_train sweep, in seed order."""
        return np.array(
            [r.hit_rate for r in self.n_train_records if r.method == method and r.n_train == n_train]
        )

    def mean_hit_rate(self, method: str) -> dict[int, float]:
        return {n: float(self.hit_rates(method, n).mean()) for n in self.config.n_train_grid}

    def best_n_train(self, method: str) -> tuple[int, float]:
        means = self.mean_hit_rate(method)
        best = max(means, key=lambda n: (means[n], -n))
        return best, means[best]

    def hits_at(self, method: str, n_obstacles: int) -> np.ndarray:
        return np.array(
            [r.hits for r in self.obstacle_records if r.method == method and r.param_value == n_obstacles]
        )

    def obstacle_drop(self, method: str) -> float:
        lo, hi = min(self.config.obstacle_grid), max(self.config.obstacle_grid)
        return float((self.hits_at(method, lo) - self.hits_at(method, hi)).mean())

    def mean_curve(self, method: str, normalized: bool = True) -> np.ndarray:
        curves = self.curves if normalized else self.raw_curves
        return np.mean(np.array(curves[method]), axis=0)


def run_harness(cfg: HarnessConfig) -> HarnessResult:
    start = time.perf_counter()
    res = HarnessResult(cfg)
    for store in (res.curves, res.raw_curves, res.curve_episodes):
        store.update({m: [] for m in METHODS})
    for seed in cfg.seeds:
        base = ExperimentConfig(
            method="both",
            n_train=cfg.n_train,
            n_test=cfg.n_test,
            scenario=cfg.scenario,
            master_seed=seed,
            train_policy=cfg.train_policy,
            jobs=cfg.jobs,
        )
        res.n_train_records += sweep(replace(base, sweep=("n_train", cfg.n_train_grid)))
        res.obstacle_records += sweep(replace(base, sweep=("n_obstacles", cfg.obstacle_grid)))
        for method in METHODS:
            _, curve, episodes = reward_curve_by_steps(base, method, cfg.curve_windows)
            res.curves[method].append(curve.normalized)
            res.raw_curves[method].append(curve.cumsum)
            res.curve_episodes[method].append(episodes)
        log.info("seed %d done after %.0f s", seed, time.perf_counter() - start)
    res.seconds = time.perf_counter() - start
    return res
