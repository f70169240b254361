import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dpoint.learning import (
    DPOINT,
    OPPONENT,
    Action,
    PreconditionViolation,
    QTable,
    transition_reward,
)
from dpoint.world import (
    EpisodeMode,
    Outcome,
    PlacementFailure,
    ScenarioConfig,
    Trace,
    WorldState,
    execute_action,
    generate_scenario,
    run_episode,
    step_frame,
)


def make_world(cfg, agent, target, obstacles, speed=0.0, heading=0.0):
    positions = np.vstack([target] + list(obstacles)) if obstacles else np.array([target], float)
    m = len(positions)
    return WorldState(
        cfg,
        np.random.default_rng(0),
        agent,
        positions,
        np.full(m, heading),
        np.full(m, speed),
        np.full(m, cfg.redirect_interval),
    )


def ring_world(r_ns=22.0, radius=20.0, n=12):
    cfg = ScenarioConfig(n_obstacles=n, r_ns=r_ns, static=True)
    c = np.array([50.0, 50.0])
    ring = [c + radius * np.array([math.cos(a), math.sin(a)]) for a in np.linspace(0, 2 * math.pi, n, endpoint=False)]
    return make_world(cfg, (50.0, 50.0), np.array([50.0, 95.0]), ring)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=50)
def test_placement_constraints(seed):
    cfg = ScenarioConfig(n_obstacles=15)
    w = generate_scenario(cfg, np.random.default_rng(seed))
    assert 50.0 <= w.target_distance() <= 70.0
    d = np.hypot(w.pos[1:, 0] - w.ax, w.pos[1:, 1] - w.ay)
    assert (d > 5.0).all()
    assert ((w.pos >= 0) & (w.pos <= 100)).all()
    assert ((w.speed >= 0.02) & (w.speed <= 0.05)).all()
    assert w.n_obstacles == 15


def test_placement_dense_never_fails():
    cfg = ScenarioConfig(n_obstacles=30, r_ns=6.2)
    for seed in range(10_000):
        generate_scenario(cfg, np.random.default_rng(seed))


def test_placement_failure():
    cfg = ScenarioConfig(min_target_distance=500.0, max_target_distance=600.0)
    with pytest.raises(PlacementFailure):
        generate_scenario(cfg, np.random.default_rng(0))


def test_generation_deterministic():
    cfg = ScenarioConfig()
    a = generate_scenario(cfg, np.random.default_rng(42))
    b = generate_scenario(cfg, np.random.default_rng(42))
    np.testing.assert_array_equal(a.pos, b.pos)
    np.testing.assert_array_equal(a.vel, b.vel)
    for _ in range(1000):
        a.step_objects()
        b.step_objects()
    np.testing.assert_array_equal(a.pos, b.pos)


def test_static_agent_closes_at_agent_speed():
    cfg = ScenarioConfig(n_obstacles=0, static=True)
    w = make_world(cfg, (10.0, 10.0), np.array([70.0, 10.0]), [])
    d0 = w.target_distance()
    step_frame(w)
    assert d0 - w.target_distance() == pytest.approx(0.2, abs=1e-12)


def test_zero_obstacles_reach_target():
    cfg = ScenarioConfig(n_obstacles=0)
    for seed in range(20):
        w = generate_scenario(cfg, np.random.default_rng(seed))
        out = run_episode(w, QTable(DPOINT))
        assert out.kind is Outcome.SUCCESS
        assert out.rewards_log == []


def test_wall_reflection():
    cfg = ScenarioConfig(n_obstacles=1)
    w = make_world(cfg, (50.0, 50.0), np.array([10.0, 10.0]), [np.array([99.99, 30.0])], speed=0.05)
    for _ in range(3):
        w.step_objects()
    assert 0.0 <= w.pos[1, 0] <= 100.0
    assert w.vel[1, 0] < 0
    assert w.pos[1, 0] == pytest.approx(100.0 - (99.99 + 0.15 - 100.0))
    assert w.obstacles[0].speed == pytest.approx(0.05)


def test_redirect_keeps_speed():
    cfg = ScenarioConfig(n_obstacles=8)
    w = generate_scenario(cfg, np.random.default_rng(3))
    speeds = w.speed.copy()
    for _ in range(600):
        w.step_objects()
        np.testing.assert_allclose(np.hypot(w.vel[:, 0], w.vel[:, 1]), speeds, rtol=1e-12)
        assert ((w.pos >= 0) & (w.pos <= 100)).all()


def nonsafe_world():
    cfg = ScenarioConfig(n_obstacles=1, r_ns=4.7, static=True)
    return make_world(cfg, (50.0, 50.0), np.array([50.0, 100.0]), [np.array([51.0, 53.0])])


def test_action_translates_two_units():
    w = nonsafe_world()
    w.heading, w.seeking = 0.3, False
    x0, y0 = w.ax, w.ay
    rec = execute_action(w, Action.LEFT, DPOINT)
    h = 0.3 + math.radians(rec.degrees)
    assert w.heading == pytest.approx(h)
    assert (w.ax - x0, w.ay - y0) == pytest.approx((2.0 * math.cos(h), 2.0 * math.sin(h)))
    assert w.frame == 10


def test_left_right_inverse():
    a, b = nonsafe_world(), nonsafe_world()
    execute_action(a, Action.LEFT, DPOINT)
    execute_action(b, Action.RIGHT, DPOINT)
    h_left, h_right = a.heading, b.heading
    base = math.atan2(50.0, 0.0)
    assert h_left - base == pytest.approx(base - h_right)


def test_forward_keeps_heading():
    w = nonsafe_world()
    h = w.heading
    rec = execute_action(w, Action.FORWARD, OPPONENT)
    assert w.heading == h
    assert rec.degrees > 0


def test_action_requires_nonsafe():
    cfg = ScenarioConfig(n_obstacles=1, static=True)
    w = make_world(cfg, (50.0, 50.0), np.array([50.0, 100.0]), [np.array([10.0, 10.0])])
    with pytest.raises(PreconditionViolation):
        execute_action(w, Action.LEFT, DPOINT)


def test_rescue_in_world():
    # the worked-example geometry; turning away until the agent leaves is +1
    cfg = ScenarioConfig(n_obstacles=1, r_ns=6.2, static=True)
    w = make_world(cfg, (4.9 + 50, -3.1 + 50), np.array([51.2, 63.0]), [np.array([50.0, 50.0])])
    assert w.nearest_dist == pytest.approx(5.798, abs=1e-3)
    rewards = []
    while w.in_nonsafe:
        rec = execute_action(w, Action.RIGHT, DPOINT)
        rewards.append(transition_reward(DPOINT, rec.before, rec.after, cfg.r_ns))
        assert (rewards[-1] == 1) == (rec.after.v_ao > cfg.r_ns)
    assert rewards[-1] == 1
    assert 1 not in rewards[:-1]


def test_ring_traps_at_threshold():
    w = ring_world()
    assert w.trap_frames == 75
    out = run_episode(w, QTable(DPOINT))
    assert out.kind is Outcome.TRAPPED
    assert out.frames_elapsed == 75


def test_timeout():
    cfg = ScenarioConfig(n_obstacles=0, max_frames=5)
    w = make_world(cfg, (10.0, 10.0), np.array([70.0, 10.0]), [])
    out = run_episode(w, QTable(DPOINT))
    assert out.kind is Outcome.TIMEOUT
    assert out.frames_elapsed == 5


def test_collision():
    cfg = ScenarioConfig(n_obstacles=1, r_ns=0.5, static=True)
    w = make_world(cfg, (10.0, 10.0), np.array([70.0, 10.0]), [np.array([20.0, 10.0])])
    out = run_episode(w, QTable(DPOINT))
    assert out.kind is Outcome.COLLISION


def test_success_precedes_collision():
    cfg = ScenarioConfig(n_obstacles=1, static=True)
    w = make_world(cfg, (10.0, 10.0), np.array([11.0, 10.0]), [np.array([10.5, 10.2])])
    assert w.outcome() is Outcome.SUCCESS


@pytest.mark.parametrize("table", [QTable(DPOINT), QTable(OPPONENT)])
def test_episode_deterministic(table):
    cfg = ScenarioConfig(n_obstacles=20)
    runs = []
    for _ in range(2):
        w = generate_scenario(cfg, np.random.default_rng(11))
        t = table.copy()
        out = run_episode(w, t, EpisodeMode.TRAIN, rng=np.random.default_rng(5))
        runs.append((out.kind, out.frames_elapsed, out.rewards_log, out.path, t.values.tobytes()))
    assert runs[0] == runs[1]


def test_scene_independent_of_agent():
    cfg = ScenarioConfig(n_obstacles=20)
    a = generate_scenario(cfg, np.random.default_rng(8))
    b = generate_scenario(cfg, np.random.default_rng(8))
    run_episode(a, QTable(DPOINT))
    out = run_episode(b, QTable(OPPONENT, np.random.default_rng(0).normal(size=(128, 3))))
    while b.frame < a.frame:
        step_frame(b)
    while a.frame < b.frame:
        step_frame(a)
    np.testing.assert_array_equal(a.pos, b.pos)
    assert out.kind in Outcome


def test_trace_lines():
    w = ring_world()
    trace = Trace({"note": "ring"})
    out = run_episode(w, QTable(DPOINT), trace=trace)
    lines = trace.lines()
    assert lines[0] == "# note=ring"
    assert lines[1] == Trace.HEADER
    assert len(lines) == 2 + out.frames_elapsed + 1
    assert ",action:L:" in lines[2]
    assert lines[2].split(",")[0] == "0"
    assert lines[-1].endswith("done:trapped")
