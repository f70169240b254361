"""Training and evaluation harness: hit rates, reward curves and parameter sweeps.

Every episode draws its scene from ``SeedSequence([master_seed, phase, episode_id])``,
so the two planners (and every value of a sweep) face the same scenarios.
"""

from __future__ import annotations

import csv
import io
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .learning import DEFAULT_GAMMA, Mode, QTable, Variant, get_variant
from .world import EpisodeMode, Outcome, ScenarioConfig, generate_scenario, run_episode

log = logging.getLogger(__name__)

TRAIN_PHASE = 0
TEST_PHASE = 1
REWARD_WINDOW = 100

SWEEP_PARAMS = ("n_train", "r_ns", "n_obstacles")
METHODS = ("dpoint", "opponent")

RESULTS_HEADER = (
    "method,param_name,param_value,n_train,n_test,hits,hit_rate,"
    "collisions,trapped,timeouts,mean_frames,master_seed"
).split(",")
CURVE_HEADER = ["window_index", "cumsum", "normalized"]


@dataclass(frozen=True)
class ExperimentConfig:
    method: str = "dpoint"  # "dpoint", "opponent" or "both"
    n_train: int = 50
    n_test: int = 500
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    sweep: Optional[tuple[str, tuple]] = None
    master_seed: int = 0
    train_policy: Mode = Mode.EXPLORE_RANDOM
    gamma: float = DEFAULT_GAMMA
    jobs: int = 1

    def __post_init__(self):
        if self.method not in METHODS + ("both",):
            raise ValueError(f"unknown method {self.method!r}")
        if self.n_train < 0 or self.n_test < 0:
            raise ValueError("episode counts must be non-negative")
        if self.train_policy is Mode.EXPLOIT:
            raise ValueError("training needs an exploring policy")
        if self.sweep is not None and self.sweep[0] not in SWEEP_PARAMS:
            raise ValueError(f"sweep parameter must be one of {SWEEP_PARAMS}, got {self.sweep[0]!r}")

    @property
    def methods(self) -> tuple[str, ...]:
        return METHODS if self.method == "both" else (self.method,)

    def with_value(self, param: str, value) -> ExperimentConfig:
        if param == "n_train":
            return replace(self, n_train=int(value))
        if param == "n_obstacles":
            return replace(self, scenario=replace(self.scenario, n_obstacles=int(value)))
        if param == "r_ns":
            return replace(self, scenario=replace(self.scenario, r_ns=float(value)))
        raise ValueError(f"unknown sweep parameter {param!r}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["train_policy"] = self.train_policy.value
        d["sweep"] = None if self.sweep is None else [self.sweep[0], list(self.sweep[1])]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> ExperimentConfig:
        d = dict(d)
        d["scenario"] = ScenarioConfig(**d.get("scenario", {}))
        d["train_policy"] = Mode(d.get("train_policy", Mode.EXPLORE_RANDOM.value))
        if d.get("sweep") is not None:
            d["sweep"] = (d["sweep"][0], tuple(d["sweep"][1]))
        return cls(**d)


@dataclass
class RewardCurve:
    window: int
    window_sums: list[float]
    cumsum: list[float]
    normalized: list[float]

    def __len__(self) -> int:
        return len(self.cumsum)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CURVE_HEADER)
        for i, (c, n) in enumerate(zip(self.cumsum, self.normalized)):
            w.writerow([i, repr(float(c)), repr(float(n))])
        return buf.getvalue()


@dataclass
class MetricsRecord:
    method: str
    param_name: str
    param_value: object
    n_train: int
    n_test: int
    hits: int
    hit_rate: float
    collisions: int
    trapped: int
    timeouts: int
    mean_frames: float
    master_seed: int

    @property
    def histogram(self) -> dict[Outcome, int]:
        return {
            Outcome.SUCCESS: self.hits,
            Outcome.COLLISION: self.collisions,
            Outcome.TRAPPED: self.trapped,
            Outcome.TIMEOUT: self.timeouts,
        }

    def row(self) -> list[str]:
        return [
            self.method,
            self.param_name,
            str(self.param_value),
            str(self.n_train),
            str(self.n_test),
            str(self.hits),
            repr(float(self.hit_rate)),
            str(self.collisions),
            str(self.trapped),
            str(self.timeouts),
            repr(float(self.mean_frames)),
            str(self.master_seed),
        ]


def episode_rngs(master_seed: int, phase: int, episode_id: int) -> tuple[np.random.Generator, np.random.Generator]:
    """Independent (scene, policy) streams for one episode."""
    scene, policy = np.random.SeedSequence([master_seed, phase, episode_id]).spawn(2)
    return np.random.default_rng(scene), np.random.default_rng(policy)


def cumulative_reward_curve(rewards: Sequence[float], window: int = REWARD_WINDOW) -> RewardCurve:
    """Windowed cumulative rewards, min-max scaled; an incomplete last window is dropped."""
    n_windows = len(rewards) // window
    sums = np.asarray(rewards[: n_windows * window], dtype=float).reshape(n_windows, window).sum(axis=1)
    cum = np.cumsum(sums)
    if n_windows == 0:
        norm = cum
    else:
        lo, hi = cum.min(), cum.max()
        norm = np.zeros_like(cum) if hi == lo else (cum - lo) / (hi - lo)
    return RewardCurve(window, sums.tolist(), cum.tolist(), norm.tolist())


def train_table(config: ExperimentConfig, variant: Variant) -> tuple[QTable, list[int]]:
    table = QTable(variant)
    rewards: list[int] = []
    for i in range(config.n_train):
        scene_rng, policy_rng = episode_rngs(config.master_seed, TRAIN_PHASE, i)
        world = generate_scenario(config.scenario, scene_rng)
        out = run_episode(
            world, table, EpisodeMode.TRAIN, config.train_policy, policy_rng, config.gamma
        )
        rewards.extend(r for _, r in out.rewards_log)
    return table, rewards


def run_training(config: ExperimentConfig, method: Optional[str] = None) -> tuple[QTable, RewardCurve]:
    """Train one Q-table over ``config.n_train`` fresh scenarios."""
    variant = get_variant(method or config.methods[0])
    table, rewards = train_table(config, variant)
    return table, cumulative_reward_curve(rewards)


def reward_curve_by_steps(
    config: ExperimentConfig, method: str, n_windows: int = 20, max_episodes: int = 100_000
) -> tuple[QTable, RewardCurve, int]:
    """Train on consecutive scenarios until ``n_windows`` full reward windows are logged.

    Unlike :func:`run_training` the budget is counted in reward events, not
    episodes, so the curve has a fixed length. Returns the table, the curve
    and the number of episodes it took.
    """
    table = QTable(get_variant(method))
    need = n_windows * REWARD_WINDOW
    rewards: list[int] = []
    episodes = 0
    while len(rewards) < need:
        if episodes >= max_episodes:
            raise RuntimeError(f"only {len(rewards)} reward events after {episodes} episodes")
        scene_rng, policy_rng = episode_rngs(config.master_seed, TRAIN_PHASE, episodes)
        world = generate_scenario(config.scenario, scene_rng)
        out = run_episode(
            world, table, EpisodeMode.TRAIN, config.train_policy, policy_rng, config.gamma
        )
        rewards.extend(r for _, r in out.rewards_log)
        episodes += 1
    return table, cumulative_reward_curve(rewards[:need]), episodes


def _test_outcomes(args) -> list[tuple[Outcome, int]]:
    table, config, ids = args
    out = []
    for i in ids:
        scene_rng, _ = episode_rngs(config.master_seed, TEST_PHASE, i)
        world = generate_scenario(config.scenario, scene_rng)
        res = run_episode(world, table, EpisodeMode.TEST)
        out.append((res.kind, res.frames_elapsed))
    return out


def evaluate_hit_rate(
    table: QTable, config: ExperimentConfig, param_name: str = "", param_value: object = ""
) -> MetricsRecord:
    """Exploit-only test episodes; anything but success counts as a miss."""
    ids = list(range(config.n_test))
    if config.jobs > 1 and len(ids) > 1:
        chunks = [ids[k :: config.jobs] for k in range(config.jobs)]
        with ProcessPoolExecutor(config.jobs) as pool:
            parts = list(pool.map(_test_outcomes, [(table, config, c) for c in chunks]))
        by_id = {}
        for chunk, part in zip(chunks, parts):
            by_id.update(zip(chunk, part))
        results = [by_id[i] for i in ids]
    else:
        results = _test_outcomes((table, config, ids))
    counts = {k: 0 for k in Outcome}
    for kind, _ in results:
        counts[kind] += 1
    n = len(results)
    return MetricsRecord(
        method=table.variant.name,
        param_name=param_name,
        param_value=param_value,
        n_train=config.n_train,
        n_test=n,
        hits=counts[Outcome.SUCCESS],
        hit_rate=counts[Outcome.SUCCESS] / n if n else 0.0,
        collisions=counts[Outcome.COLLISION],
        trapped=counts[Outcome.TRAPPED],
        timeouts=counts[Outcome.TIMEOUT],
        mean_frames=float(np.mean([f for _, f in results])) if n else 0.0,
        master_seed=config.master_seed,
    )


def sweep(config: ExperimentConfig) -> list[MetricsRecord]:
    """Train then evaluate at every swept value, for every configured method."""
    if config.sweep is None:
        raise ValueError("sweep() needs config.sweep = (parameter, values)")
    param, values = config.sweep
    records = []
    for value in values:
        cfg = config.with_value(param, value)
        for method in cfg.methods:
            table, _ = run_training(cfg, method)
            rec = evaluate_hit_rate(table, cfg, param, value)
            log.info("%s %s=%s hit_rate=%.3f", method, param, value, rec.hit_rate)
            records.append(rec)
    return records


def records_to_csv(records: Sequence[MetricsRecord], header: bool = True) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if header:
        w.writerow(RESULTS_HEADER)
    for r in records:
        w.writerow(r.row())
    return buf.getvalue()
