"""Tabular Q-learning kernel shared by the D-point planner and the opponent baseline."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .geometry import Point3
from .states import (
    N_DPOINT_STATES,
    N_OPPONENT_STATES,
    coerce_valid,
    encode_opponent_state,
    encode_state,
    opponent_state_index,
    state_index,
)

DEFAULT_GAMMA = 0.9
MIN_ROTATION_FRACTION = 5.0 / 90.0


class PreconditionViolation(ValueError):
    pass


class VariantMismatch(ValueError):
    pass


class IndexOutOfRange(IndexError):
    pass


class Action(enum.IntEnum):
    LEFT = 0
    RIGHT = 1
    FORWARD = 2

    @property
    def letter(self) -> str:
        return self.name[0]

    @classmethod
    def from_letter(cls, letter: str) -> Action:
        return {a.letter: a for a in cls}[letter]


class Mode(enum.Enum):
    EXPLORE_RANDOM = "random"
    EXPLORE_HEURISTIC = "heuristic"
    EXPLOIT = "exploit"


@dataclass(frozen=True)
class Variant:
    """A planning method: how it sees the world, what it can do, how it is rewarded."""

    name: str
    n_states: int
    actions: tuple[Action, ...]
    encode: Callable[[Point3, Point3, Point3], int]

    @property
    def n_actions(self) -> int:
        return len(self.actions)


def _dpoint_index(agent: Point3, target: Point3, obstacle: Point3) -> int:
    return state_index(coerce_valid(encode_state(agent, target, obstacle)))


def _opponent_index(agent: Point3, target: Point3, obstacle: Point3) -> int:
    return opponent_state_index(encode_opponent_state(agent, target, obstacle))


DPOINT = Variant("dpoint", N_DPOINT_STATES, (Action.LEFT, Action.RIGHT), _dpoint_index)
OPPONENT = Variant(
    "opponent", N_OPPONENT_STATES, (Action.LEFT, Action.RIGHT, Action.FORWARD), _opponent_index
)
VARIANTS = {v.name: v for v in (DPOINT, OPPONENT)}


def get_variant(name: str) -> Variant:
    try:
        return VARIANTS[name]
    except KeyError:
        raise ValueError(f"unknown method {name!r}; expected one of {sorted(VARIANTS)}") from None


@dataclass
class QTable:
    variant: Variant
    values: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.values is None:
            self.values = np.zeros((self.variant.n_states, self.variant.n_actions))
        if self.values.shape != (self.variant.n_states, self.variant.n_actions):
            raise VariantMismatch(
                f"{self.variant.name} table needs shape "
                f"{(self.variant.n_states, self.variant.n_actions)}, got {self.values.shape}"
            )

    @property
    def n_states(self) -> int:
        return self.values.shape[0]

    @property
    def n_actions(self) -> int:
        return self.values.shape[1]

    def copy(self) -> QTable:
        return QTable(self.variant, self.values.copy())

    def _check(self, s: int, a: Action) -> None:
        if not 0 <= s < self.n_states:
            raise IndexOutOfRange(f"state {s} outside [0, {self.n_states})")
        if a not in self.variant.actions:
            raise IndexOutOfRange(f"action {a.name} not available to {self.variant.name}")

    def __getitem__(self, key: tuple[int, Action]) -> float:
        s, a = key
        self._check(s, a)
        return float(self.values[s, self.variant.actions.index(a)])

    def save(self, path: str | Path, gamma: float = DEFAULT_GAMMA) -> None:
        lines = [
            f"# variant={self.variant.name} gamma={gamma!r} "
            f"n_states={self.n_states} n_actions={self.n_actions}"
        ]
        for s in range(self.n_states):
            for j, a in enumerate(self.variant.actions):
                lines.append(f"{s},{a.letter},{format(float(self.values[s, j]), '.17g')}")
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path: str | Path, method: Optional[str] = None) -> tuple[QTable, float]:
        """Read a table written by :meth:`save`; returns ``(table, gamma)``.

        If ``method`` is given, the table's dimensions must match that variant.
        """
        text = Path(path).read_text().splitlines()
        if not text or not text[0].startswith("#"):
            raise ValueError(f"{path}: missing Q-table header")
        header = dict(kv.split("=", 1) for kv in text[0][1:].split())
        n_states, n_actions = int(header["n_states"]), int(header["n_actions"])
        variant = get_variant(method) if method else get_variant(header["variant"])
        if (n_states, n_actions) != (variant.n_states, variant.n_actions):
            raise VariantMismatch(
                f"{path}: {n_states}x{n_actions} table cannot serve method {variant.name} "
                f"({variant.n_states}x{variant.n_actions})"
            )
        values = np.zeros((n_states, n_actions))
        for lineno, line in enumerate(text[1:], start=2):
            if not line.strip():
                continue
            try:
                s, letter, v = line.split(",")
                values[int(s), variant.actions.index(Action.from_letter(letter))] = float(v)
            except (ValueError, KeyError, IndexError):
                raise ValueError(f"{path}:{lineno}: malformed Q-table entry {line!r}") from None
        return cls(variant, values), float(header.get("gamma", DEFAULT_GAMMA))


def q_update(table: QTable, s: int, a: Action, r: float, s_next: int, gamma: float = DEFAULT_GAMMA) -> QTable:
    """Deterministic Q-learning rule, ``Q(s, a) <- r + gamma * max Q(s_next, .)``.

    There is deliberately no learning rate.
    """
    if not 0.0 <= gamma < 1.0:
        raise ValueError(f"gamma must be in [0, 1), got {gamma}")
    table._check(s, a)
    if not 0 <= s_next < table.n_states:
        raise IndexOutOfRange(f"state {s_next} outside [0, {table.n_states})")
    table.values[s, table.variant.actions.index(a)] = r + gamma * float(table.values[s_next].max())
    return table


def select_action(
    table: QTable,
    s: int,
    mode: Mode,
    context: Optional[Callable[[Action], float]] = None,
    rng: Optional[np.random.Generator] = None,
) -> Action:
    """Pick an action for state ``s``.

    ``context`` is only used by :attr:`Mode.EXPLORE_HEURISTIC`: it maps an
    action to the D-point/obstacle distance predicted after taking it.
    Ties always go to the earlier action in Left, Right, Forward order.
    """
    actions = table.variant.actions
    if mode is Mode.EXPLORE_RANDOM:
        if rng is None:
            raise ValueError("random exploration needs an rng")
        return actions[int(rng.integers(len(actions)))]
    if mode is Mode.EXPLORE_HEURISTIC:
        if context is None:
            raise ValueError("heuristic exploration needs a lookahead context")
        predicted = [context(a) for a in actions]
        return actions[int(np.argmax(predicted))]
    return actions[int(np.argmax(table.values[s]))]


@dataclass(frozen=True)
class TransitionSnapshot:
    """What the agent sees about itself and the obstacle it is acting against."""

    frame: int
    agent: Point3
    target: Point3
    obstacle: Point3
    obstacle_id: int
    v_ao: float  # agent to obstacle distance
    d_do: float  # D-point to obstacle distance
    state: int  # encoded against the nearest obstacle at this frame


def classify_reward(before: TransitionSnapshot, after: TransitionSnapshot, r_ns: float) -> int:
    """Rescue (+1), involving (-1) or escape (0), checked in that order."""
    if before.v_ao > r_ns:
        raise PreconditionViolation(
            f"agent at {before.v_ao:.4g} from obstacle is outside the non-safe radius {r_ns}"
        )
    if after.v_ao > r_ns:
        return 1
    if after.d_do < before.d_do:
        return -1
    return 0


def opponent_reward(before_dist: float, after_dist: float) -> int:
    if before_dist < 0 or after_dist < 0:
        raise ValueError("distances must be non-negative")
    if after_dist < before_dist:
        return -1
    if after_dist > before_dist:
        return 1
    return 0


def rotation_degree(d_do: float, r_ns: float) -> float:
    """Turn magnitude in degrees: 90 with the obstacle on the path, 5 at the non-safe edge."""
    if r_ns <= 0:
        raise ValueError("non-safe radius must be positive")
    frac = 1.0 - max(d_do, 0.0) / r_ns
    return 90.0 * min(1.0, max(MIN_ROTATION_FRACTION, frac))


def signed_rotation(action: Action, degrees: float) -> float:
    """Heading change in radians; Left is counterclockwise."""
    if action is Action.FORWARD:
        return 0.0
    sign = 1.0 if action is Action.LEFT else -1.0
    return sign * math.radians(degrees)


def transition_reward(variant: Variant, before: TransitionSnapshot, after: TransitionSnapshot, r_ns: float) -> int:
    if variant is OPPONENT:
        return opponent_reward(before.v_ao, after.v_ao)
    return classify_reward(before, after, r_ns)
