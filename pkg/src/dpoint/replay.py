"""Reading episode traces back and turning them into SVG storyboards.

A trace carries only the agent's side of the episode. Obstacles and the target
are rebuilt from the seed metadata in the ``#`` header, which works because
their motion never depends on the agent.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .experiments import TEST_PHASE, episode_rngs
from .svg import arena_frame
from .world import ScenarioConfig, Trace, WorldState, generate_scenario


class TraceError(ValueError):
    pass


@dataclass
class TraceRow:
    frame: int
    x: float
    y: float
    heading: float
    nearest_id: int
    in_nonsafe: bool
    events: list[str]


@dataclass
class ParsedTrace:
    meta: dict = field(default_factory=dict)
    rows: list[TraceRow] = field(default_factory=list)


def parse_trace(path: str | Path) -> ParsedTrace:
    out = ParsedTrace()
    seen_header = False
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, sep, value = line[1:].strip().partition("=")
            if not sep:
                raise TraceError(f"line {lineno}: metadata must be '# key=value'")
            out.meta[key.strip()] = value.strip()
            continue
        if not seen_header:
            if line != Trace.HEADER:
                raise TraceError(f"line {lineno}: expected column header {Trace.HEADER!r}")
            seen_header = True
            continue
        parts = line.split(",")
        if len(parts) != 7:
            raise TraceError(f"line {lineno}: expected 7 fields, got {len(parts)}")
        try:
            row = TraceRow(
                int(parts[0]),
                float(parts[1]),
                float(parts[2]),
                float(parts[3]),
                int(parts[4]),
                parts[5] == "1",
                [] if parts[6] == "-" else parts[6].split(";"),
            )
        except ValueError as exc:
            raise TraceError(f"line {lineno}: {exc}") from None
        if parts[5] not in ("0", "1"):
            raise TraceError(f"line {lineno}: in_nonsafe must be 0 or 1")
        out.rows.append(row)
    return out


def rebuild_scene(meta: dict) -> Optional[WorldState]:
    """Regenerate the episode's world from trace metadata, or ``None`` if absent."""
    if "scenario" not in meta or "master_seed" not in meta:
        return None
    scenario = ScenarioConfig(**json.loads(meta["scenario"]))
    scene_rng, _ = episode_rngs(
        int(meta["master_seed"]), int(meta.get("phase", TEST_PHASE)), int(meta.get("episode", 0))
    )
    return generate_scenario(scenario, scene_rng)


def sample_frames(n_rows: int, k: int) -> list[int]:
    """``k`` row indices spread evenly from the first to the last row."""
    if n_rows == 0 or k <= 0:
        return []
    if k == 1 or n_rows == 1:
        return [n_rows - 1]
    k = min(k, n_rows)
    return sorted({round(i * (n_rows - 1) / (k - 1)) for i in range(k)})


def render_replay(trace: ParsedTrace, k: int = 6) -> list[str]:
    """One SVG document per sampled frame."""
    picks = sample_frames(len(trace.rows), k)
    if not picks:
        return []
    world = rebuild_scene(trace.meta)
    size = world.config.arena if world else 100.0
    r_ns = world.config.r_ns if world else 0.0
    r_body = world.config.r_body if world else 1.0
    docs = []
    path = [(r.x, r.y) for r in trace.rows]
    for idx in picks:
        frame = trace.rows[idx].frame
        obstacles, target = [], None
        if world is not None:
            while world._t < frame:
                world.step_objects()
            obstacles = [(float(x), float(y)) for x, y in world.pos[1:]]
            target = (float(world.pos[0, 0]), float(world.pos[0, 1]))
        docs.append(
            arena_frame(
                size, path[: idx + 1], obstacles, target, r_ns, r_body, label=f"frame {frame}"
            )
        )
    return docs
