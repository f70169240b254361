import numpy as np
import pytest

from dpoint.experiments import (
    RESULTS_HEADER,
    ExperimentConfig,
    cumulative_reward_curve,
    evaluate_hit_rate,
    records_to_csv,
    reward_curve_by_steps,
    run_training,
    sweep,
)
from dpoint.learning import DPOINT, OPPONENT, Mode, QTable
from dpoint.world import Outcome, ScenarioConfig

SMALL = ScenarioConfig(n_obstacles=15)


def test_no_training_gives_zero_table():
    table, curve = run_training(ExperimentConfig(n_train=0))
    assert not table.values.any()
    assert len(curve) == 0
    assert curve.normalized == []


def test_training_deterministic():
    cfg = ExperimentConfig(n_train=5, master_seed=3, scenario=SMALL)
    a, ca = run_training(cfg)
    b, cb = run_training(cfg)
    np.testing.assert_array_equal(a.values, b.values)
    assert ca == cb


def test_training_changes_table():
    cfg = ExperimentConfig(n_train=10, scenario=SMALL, train_policy=Mode.EXPLORE_HEURISTIC)
    table, _ = run_training(cfg, "opponent")
    assert table.variant is OPPONENT
    assert table.values.any()


def test_curve_all_positive_is_linear():
    c = cumulative_reward_curve([1] * 500)
    assert c.window_sums == [100.0] * 5
    assert c.cumsum == [100.0, 200.0, 300.0, 400.0, 500.0]
    assert c.normalized == [0.0, 0.25, 0.5, 0.75, 1.0]


def test_curve_all_zero_is_flat_zero():
    c = cumulative_reward_curve([0] * 300)
    assert c.normalized == [0.0, 0.0, 0.0]


def test_curve_alternating_is_flat():
    c = cumulative_reward_curve([1, -1] * 200)
    assert c.cumsum == [0.0] * 4
    assert c.normalized == [0.0] * 4


def test_curve_drops_tail():
    c = cumulative_reward_curve([1] * 250)
    assert len(c) == 2
    assert c.to_csv().splitlines()[0] == "window_index,cumsum,normalized"


def test_zero_obstacles_hit_everything():
    cfg = ExperimentConfig(n_test=25, scenario=ScenarioConfig(n_obstacles=0))
    rec = evaluate_hit_rate(QTable(DPOINT), cfg)
    assert rec.hit_rate == 1.0
    assert rec.hits == 25


def test_metrics_histogram_partitions():
    cfg = ExperimentConfig(n_test=30, scenario=ScenarioConfig(n_obstacles=30))
    rec = evaluate_hit_rate(QTable(DPOINT), cfg)
    assert sum(rec.histogram.values()) == rec.n_test == 30
    assert rec.hit_rate == rec.hits / rec.n_test
    assert set(rec.histogram) == set(Outcome)


def test_untrained_table_nonzero_hits():
    rec = evaluate_hit_rate(QTable(DPOINT), ExperimentConfig(n_test=20, scenario=SMALL))
    assert rec.hits > 0


def test_jobs_do_not_change_results():
    cfg = ExperimentConfig(n_test=12, scenario=SMALL)
    one = evaluate_hit_rate(QTable(OPPONENT), cfg)
    two = evaluate_hit_rate(QTable(OPPONENT), ExperimentConfig(n_test=12, scenario=SMALL, jobs=2))
    assert one.row() == two.row()


def test_sweep_rows_and_csv():
    cfg = ExperimentConfig(
        method="both", n_train=2, n_test=5, scenario=SMALL, sweep=("n_obstacles", (5, 10, 15))
    )
    records = sweep(cfg)
    assert len(records) == 3 * 2
    assert [r.method for r in records[:2]] == ["dpoint", "opponent"]
    text = records_to_csv(records)
    lines = text.splitlines()
    assert lines[0].split(",") == RESULTS_HEADER
    assert len(lines) == 7
    assert text == records_to_csv(sweep(cfg))


def test_methods_are_paired():
    # an all-zero table always turns Left for both methods, so outcomes match
    cfg = ExperimentConfig(n_test=20, scenario=SMALL)
    a = evaluate_hit_rate(QTable(DPOINT), cfg)
    b = evaluate_hit_rate(QTable(OPPONENT), cfg)
    assert a.row()[1:] == b.row()[1:]


def test_config_validation_and_roundtrip():
    with pytest.raises(ValueError):
        ExperimentConfig(sweep=("speed", (1,)))
    with pytest.raises(ValueError):
        ExperimentConfig(method="astar")
    with pytest.raises(ValueError):
        ExperimentConfig(train_policy=Mode.EXPLOIT)
    cfg = ExperimentConfig(method="both", sweep=("r_ns", (3.7, 6.2)), train_policy=Mode.EXPLORE_HEURISTIC)
    assert ExperimentConfig.from_dict(cfg.to_dict()) == cfg
    assert cfg.with_value("r_ns", 5.2).scenario.r_ns == 5.2


def test_reward_curve_by_steps():
    cfg = ExperimentConfig(scenario=SMALL, train_policy=Mode.EXPLORE_HEURISTIC)
    table, curve, episodes = reward_curve_by_steps(cfg, "dpoint", n_windows=3)
    assert len(curve) == 3
    assert all(0.0 <= v <= 1.0 for v in curve.normalized)
    assert min(curve.normalized) == 0.0
    assert episodes > 0
    again = reward_curve_by_steps(cfg, "dpoint", n_windows=3)
    assert again[1] == curve and again[2] == episodes
