"""Exact bimatrix games with optional external bookkeeping agents.

Payoffs are stored as :class:`fractions.Fraction` so that dominance and
equilibrium checks never need a tolerance.  Agents are addressed by name:
``"Row"``, ``"Col"`` or the label of an external agent such as ``"M1"``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Any, Iterable, Sequence

from .errors import GameInputError

ROW = "Row"
COL = "Col"
PLAYERS = (ROW, COL)

Matrix = tuple[tuple[Fraction, ...], ...]


def to_fraction(value: Any) -> Fraction:
    """Convert an int, Fraction, ``"p/q"`` string or float to a Fraction.

    Floats go through their shortest repr, so ``0.1`` becomes ``1/10``.
    """
    if isinstance(value, bool):
        raise GameInputError(f"not a rational payoff: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, Rational):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise GameInputError(f"non-finite payoff: {value!r}")
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise GameInputError(f"not a rational payoff: {value!r}") from exc
    raise GameInputError(f"not a rational payoff: {value!r}")


def fraction_to_json(value: Fraction) -> int | str:
    return value.numerator if value.denominator == 1 else f"{value.numerator}/{value.denominator}"


def _coerce_matrix(rows: Iterable[Iterable[Any]]) -> tuple[tuple[Any, ...], ...]:
    # Entries that cannot be read as rationals are kept verbatim so that
    # validate_game can report them instead of the constructor raising.
    out = []
    for r in rows:
        cells = []
        for v in r:
            try:
                cells.append(to_fraction(v))
            except GameInputError:
                cells.append(v)
        out.append(tuple(cells))
    return tuple(out)


def zeros(n_rows: int, n_cols: int) -> Matrix:
    return tuple(tuple(Fraction(0) for _ in range(n_cols)) for _ in range(n_rows))


@dataclass(frozen=True)
class ActionProfile:
    """Pure action profile, as indices into a game's action lists."""

    row: int
    col: int

    def labels(self, game: BimatrixGame) -> tuple[str, str]:
        return game.row_actions[self.row], game.col_actions[self.col]


@dataclass(frozen=True)
class BimatrixGame:
    """Two strategic players plus zero or more payoff-only external agents.

    ``externals`` is an ordered tuple of ``(label, matrix)`` pairs.  Every
    matrix is indexed ``[row action][col action]``.
    """

    row_actions: tuple[str, ...]
    col_actions: tuple[str, ...]
    row_payoffs: Matrix
    col_payoffs: Matrix
    externals: tuple[tuple[str, Matrix], ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "row_actions", tuple(self.row_actions))
        object.__setattr__(self, "col_actions", tuple(self.col_actions))
        object.__setattr__(self, "row_payoffs", _coerce_matrix(self.row_payoffs))
        object.__setattr__(self, "col_payoffs", _coerce_matrix(self.col_payoffs))
        ext = self.externals.items() if isinstance(self.externals, dict) else self.externals
        object.__setattr__(
            self, "externals", tuple((str(k), _coerce_matrix(m)) for k, m in ext)
        )

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.row_actions), len(self.col_actions)

    @property
    def external_labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.externals)

    @property
    def agents(self) -> tuple[str, ...]:
        return PLAYERS + self.external_labels

    def actions(self, player: str) -> tuple[str, ...]:
        if player == ROW:
            return self.row_actions
        if player == COL:
            return self.col_actions
        raise GameInputError(f"not a player: {player!r}")

    def action_index(self, player: str, label: str) -> int:
        actions = self.actions(player)
        try:
            return actions.index(label)
        except ValueError:
            raise GameInputError(
                f"unknown {player} action {label!r}; expected one of {list(actions)}"
            ) from None

    def table(self, agent: str) -> Matrix:
        if agent == ROW:
            return self.row_payoffs
        if agent == COL:
            return self.col_payoffs
        for label, matrix in self.externals:
            if label == agent:
                return matrix
        raise GameInputError(f"unknown agent {agent!r}")

    def has_agent(self, agent: str) -> bool:
        return agent in self.agents

    def with_table(self, agent: str, matrix: Sequence[Sequence[Any]]) -> BimatrixGame:
        """Return a copy with ``agent``'s table replaced (appending new externals)."""
        if agent == ROW:
            return BimatrixGame(self.row_actions, self.col_actions, matrix, self.col_payoffs, self.externals)
        if agent == COL:
            return BimatrixGame(self.row_actions, self.col_actions, self.row_payoffs, matrix, self.externals)
        ext = list(self.externals)
        for i, (label, _) in enumerate(ext):
            if label == agent:
                ext[i] = (label, matrix)
                break
        else:
            ext.append((agent, matrix))
        return BimatrixGame(self.row_actions, self.col_actions, self.row_payoffs, self.col_payoffs, tuple(ext))

    def with_external(self, agent: str) -> BimatrixGame:
        """Ensure an external table exists for ``agent`` (zeros if absent)."""
        if self.has_agent(agent):
            return self
        return self.with_table(agent, zeros(*self.shape))

    def profile(self, row_label: str, col_label: str) -> ActionProfile:
        return ActionProfile(self.action_index(ROW, row_label), self.action_index(COL, col_label))

    def cell(self, profile: ActionProfile) -> dict[str, Fraction]:
        """All agents' payoffs at ``profile``."""
        return {agent: payoff(self, profile, agent) for agent in self.agents}


def validate_game(game: BimatrixGame) -> list[str]:
    """List every structural problem with ``game``; empty means valid."""
    problems = []
    n_rows, n_cols = game.shape
    for axis, labels in (("row", game.row_actions), ("col", game.col_actions)):
        if not labels:
            problems.append(f"{axis} actions: empty action list")
        for label in labels:
            if not isinstance(label, str) or not label:
                problems.append(f"{axis} actions: empty or non-string label {label!r}")
        seen = set()
        for label in labels:
            if label in seen:
                problems.append(f"{axis} actions: duplicate label {label!r}")
            seen.add(label)
    tables = [(ROW, game.row_payoffs), (COL, game.col_payoffs), *game.externals]
    ext_seen = set()
    for label, _ in game.externals:
        if label in PLAYERS or not label:
            problems.append(f"externals: invalid agent label {label!r}")
        if label in ext_seen:
            problems.append(f"externals: duplicate agent label {label!r}")
        ext_seen.add(label)
    for agent, matrix in tables:
        dims = (len(matrix), {len(r) for r in matrix})
        if dims[0] != n_rows or (dims[1] and dims[1] != {n_cols}):
            shapes = sorted(dims[1]) if dims[1] else [0]
            problems.append(
                f"{agent} payoffs: dimension mismatch, got {dims[0]}x{shapes} "
                f"expected {n_rows}x{n_cols}"
            )
        for i, r in enumerate(matrix):
            for j, v in enumerate(r):
                if not isinstance(v, Fraction):
                    problems.append(f"{agent} payoffs: entry [{i}][{j}] = {v!r} is not a finite rational")
    return problems


def payoff(game: BimatrixGame, profile: ActionProfile, agent: str) -> Fraction:
    n_rows, n_cols = game.shape
    if not (0 <= profile.row < n_rows and 0 <= profile.col < n_cols):
        raise GameInputError(f"profile {profile} out of bounds for a {n_rows}x{n_cols} game")
    return game.table(agent)[profile.row][profile.col]


def affine_rescale(game: BimatrixGame, agent: str, scale: Any, shift: Any = 0) -> BimatrixGame:
    """Map every payoff ``p`` of ``agent`` to ``scale * p + shift``."""
    scale, shift = to_fraction(scale), to_fraction(shift)
    if scale <= 0:
        raise GameInputError(f"scale must be positive, got {scale}")
    matrix = game.table(agent)
    return game.with_table(agent, [[scale * v + shift for v in r] for r in matrix])


def map_table(game: BimatrixGame, agent: str, fn) -> BimatrixGame:
    """Apply ``fn(i, j, value)`` to each entry of ``agent``'s table.

    A missing external table is created as zeros first.
    """
    game = game.with_external(agent)
    new = [[fn(i, j, v) for j, v in enumerate(r)] for i, r in enumerate(game.table(agent))]
    return game.with_table(agent, new)


# -- JSON -------------------------------------------------------------------

def _matrix_to_json(matrix) -> list[list[int | str]]:
    return [[fraction_to_json(v) for v in r] for r in matrix]


def game_to_dict(game: BimatrixGame) -> dict[str, Any]:
    doc: dict[str, Any] = {
        "row_actions": list(game.row_actions),
        "col_actions": list(game.col_actions),
        "row_payoffs": _matrix_to_json(game.row_payoffs),
        "col_payoffs": _matrix_to_json(game.col_payoffs),
    }
    if game.externals:
        doc["externals"] = {label: _matrix_to_json(m) for label, m in game.externals}
    return doc


def game_from_dict(doc: dict[str, Any]) -> BimatrixGame:
    try:
        row_actions = doc["row_actions"]
        col_actions = doc["col_actions"]
        row_payoffs = doc["row_payoffs"]
        col_payoffs = doc["col_payoffs"]
    except (KeyError, TypeError) as exc:
        raise GameInputError(f"game document missing field: {exc}") from None
    externals = doc.get("externals") or {}
    if not isinstance(externals, dict):
        raise GameInputError("game document: 'externals' must be an object")
    game = BimatrixGame(row_actions, col_actions, row_payoffs, col_payoffs, tuple(externals.items()))
    problems = validate_game(game)
    if problems:
        raise GameInputError("invalid game: " + "; ".join(problems))
    return game


def dumps_game(game: BimatrixGame) -> str:
    return json.dumps(game_to_dict(game), indent=2)


def loads_game(text: str) -> BimatrixGame:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GameInputError(f"game document is not valid JSON: {exc}") from None
    return game_from_dict(doc)


def base_game() -> BimatrixGame:
    """The 2x2 one-sided dominant game every manipulation scenario starts from."""
    return BimatrixGame(
        row_actions=("T", "B"),
        col_actions=("L", "R"),
        row_payoffs=((4, 9), (5, 10)),
        col_payoffs=((14, 13), (6, 10)),
    )
