import json

import numpy as np
import pytest

from dpoint.experiments import TEST_PHASE, episode_rngs
from dpoint.learning import DPOINT, QTable
from dpoint.replay import TraceError, parse_trace, rebuild_scene, render_replay, sample_frames
from dpoint.world import ScenarioConfig, Trace, generate_scenario, run_episode


def write_trace(tmp_path, episode=1):
    scen = ScenarioConfig(n_obstacles=12)
    scene_rng, _ = episode_rngs(4, TEST_PHASE, episode)
    meta = {"master_seed": 4, "phase": TEST_PHASE, "episode": episode,
            "scenario": json.dumps(scen.to_dict(), sort_keys=True)}
    trace = Trace(meta)
    out = run_episode(generate_scenario(scen, scene_rng), QTable(DPOINT), trace=trace)
    path = tmp_path / "t.csv"
    trace.write(path)
    return path, out


def test_parse_roundtrip(tmp_path):
    path, out = write_trace(tmp_path)
    parsed = parse_trace(path)
    assert int(parsed.meta["episode"]) == 1
    assert len(parsed.rows) == out.frames_elapsed + 1
    assert [(r.x, r.y) for r in parsed.rows] == out.path
    assert parsed.rows[-1].events[-1] == f"done:{out.kind.value}"


def test_rebuild_scene_matches(tmp_path):
    path, _ = write_trace(tmp_path, episode=3)
    world = rebuild_scene(parse_trace(path).meta)
    scene_rng, _ = episode_rngs(4, TEST_PHASE, 3)
    ref = generate_scenario(ScenarioConfig(n_obstacles=12), scene_rng)
    np.testing.assert_array_equal(world.pos, ref.pos)
    assert rebuild_scene({}) is None


@pytest.mark.parametrize(
    "n, k, want", [(0, 5, []), (10, 0, []), (10, 1, [9]), (1, 4, [0]), (3, 6, [0, 1, 2]), (11, 3, [0, 5, 10])]
)
def test_sample_frames(n, k, want):
    assert sample_frames(n, k) == want


def test_render_deterministic(tmp_path):
    path, _ = write_trace(tmp_path)
    a = render_replay(parse_trace(path), 5)
    b = render_replay(parse_trace(path), 5)
    assert a == b and len(a) == 5
    assert all(doc.startswith("<svg") for doc in a)
    assert a[0].count('fill="#555"') == 12


def test_render_without_meta(tmp_path):
    p = tmp_path / "t.csv"
    p.write_text(Trace.HEADER + "\n0,1.0,2.0,0.0,-1,0,-\n1,1.2,2.0,0.0,-1,0,done:success\n")
    docs = render_replay(parse_trace(p), 3)
    assert len(docs) == 2


@pytest.mark.parametrize(
    "body, msg",
    [
        ("# nometa\n", "line 1"),
        ("bogus,header\n", "line 1"),
        (Trace.HEADER + "\n0,1,2,3,4,5,-\n", "line 2"),
        (Trace.HEADER + "\n0,x,2,3,4,1,-\n", "line 2"),
    ],
)
def test_parse_errors(tmp_path, body, msg):
    p = tmp_path / "bad.csv"
    p.write_text(body)
    with pytest.raises(TraceError, match=msg):
        parse_trace(p)
