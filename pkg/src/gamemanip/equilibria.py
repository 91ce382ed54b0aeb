"""Pure-strategy equilibrium analysis and backward induction over offer games.

Everything here is exact: payoffs are Fractions, comparisons are strict,
and mixed equilibria are deliberately not computed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Any

from .errors import GameInputError, UnsupportedStructureError
from .game import COL, ROW, ActionProfile, BimatrixGame, fraction_to_json, zeros

ACCEPT = "Accept"
DECLINE = "Decline"
DECISIONS = (ACCEPT, DECLINE)


def _opponent_count(game: BimatrixGame, player: str) -> int:
    return game.shape[1] if player == ROW else game.shape[0]


def _value(game: BimatrixGame, player: str, own: int, opp: int) -> Fraction:
    return game.row_payoffs[own][opp] if player == ROW else game.col_payoffs[opp][own]


def best_responses(game: BimatrixGame, player: str, opponent_action: int) -> frozenset[int]:
    """Indices of ``player``'s actions maximising payoff against a fixed opponent action."""
    n_opp = _opponent_count(game, player)
    if not 0 <= opponent_action < n_opp:
        raise GameInputError(f"opponent action {opponent_action} out of range 0..{n_opp - 1}")
    values = [_value(game, player, a, opponent_action) for a in range(len(game.actions(player)))]
    best = max(values)
    return frozenset(a for a, v in enumerate(values) if v == best)


def pure_nash(game: BimatrixGame) -> list[ActionProfile]:
    """Mutual best-response profiles in row-major order."""
    n_rows, n_cols = game.shape
    row_br = [best_responses(game, ROW, j) for j in range(n_cols)]
    col_br = [best_responses(game, COL, i) for i in range(n_rows)]
    return [
        ActionProfile(i, j)
        for i in range(n_rows)
        for j in range(n_cols)
        if i in row_br[j] and j in col_br[i]
    ]


def strictly_dominated(game: BimatrixGame, player: str) -> frozenset[int]:
    """Actions strictly dominated by another pure action of the same player."""
    n_own = len(game.actions(player))
    n_opp = _opponent_count(game, player)
    payoffs = [[_value(game, player, a, o) for o in range(n_opp)] for a in range(n_own)]
    return frozenset(
        a
        for a in range(n_own)
        if any(all(payoffs[d][o] > payoffs[a][o] for o in range(n_opp)) for d in range(n_own) if d != a)
    )


def restrict(game: BimatrixGame, rows: list[int], cols: list[int]) -> BimatrixGame:
    """Subgame keeping only the given row and column indices."""
    def cut(m):
        return [[m[i][j] for j in cols] for i in rows]

    return BimatrixGame(
        [game.row_actions[i] for i in rows],
        [game.col_actions[j] for j in cols],
        cut(game.row_payoffs),
        cut(game.col_payoffs),
        tuple((label, cut(m)) for label, m in game.externals),
    )


@dataclass(frozen=True)
class EliminationStep:
    round: int
    player: str
    action: str


def iterated_elimination(game: BimatrixGame) -> tuple[BimatrixGame, list[EliminationStep]]:
    """Remove strictly dominated actions, Row then Col each round, until nothing changes."""
    rows = list(range(game.shape[0]))
    cols = list(range(game.shape[1]))
    log: list[EliminationStep] = []
    round_no = 0
    while True:
        round_no += 1
        changed = False
        for player in (ROW, COL):
            current = restrict(game, rows, cols)
            dominated = strictly_dominated(current, player)
            if not dominated:
                continue
            changed = True
            kept = rows if player == ROW else cols
            removed = [kept[k] for k in sorted(dominated)]
            for idx in removed:
                log.append(EliminationStep(round_no, player, game.actions(player)[idx]))
            kept[:] = [idx for idx in kept if idx not in removed]
        if not changed:
            return restrict(game, rows, cols), log


# -- two-stage offer games --------------------------------------------------

@dataclass(frozen=True)
class TwoStageGame:
    """The offeree first chooses Accept or Decline, then both play the chosen subgame."""

    accept_game: BimatrixGame
    decline_game: BimatrixGame
    offeree: str = ROW

    def __post_init__(self):
        if self.offeree not in (ROW, COL):
            raise GameInputError(f"offeree must be Row or Col, got {self.offeree!r}")
        a, d = self.accept_game, self.decline_game
        if (a.row_actions, a.col_actions) != (d.row_actions, d.col_actions):
            raise GameInputError("accept and decline subgames must share action labels")

    def subgame(self, decision: str) -> BimatrixGame:
        if decision == ACCEPT:
            return self.accept_game
        if decision == DECLINE:
            return self.decline_game
        raise GameInputError(f"unknown decision {decision!r}")

    @property
    def co_player(self) -> str:
        return COL if self.offeree == ROW else ROW

    def external_labels(self) -> tuple[str, ...]:
        labels = list(self.accept_game.external_labels)
        labels += [x for x in self.decline_game.external_labels if x not in labels]
        return tuple(labels)

    def decode_offeree_action(self, index: int) -> tuple[str, int]:
        """Reduced-form offeree action -> (decision, subgame action index)."""
        n = len(self.accept_game.actions(self.offeree))
        if not 0 <= index < 2 * n:
            raise GameInputError(f"offeree action {index} out of range")
        return DECISIONS[index // n], index % n

    def decode_plan(self, index: int) -> tuple[int, int]:
        """Reduced-form co-player action -> (action after Accept, action after Decline)."""
        n = len(self.accept_game.actions(self.co_player))
        if not 0 <= index < n * n:
            raise GameInputError(f"co-player plan {index} out of range")
        return index // n, index % n


def _external_or_zero(game: BimatrixGame, label: str):
    return game.table(label) if game.has_agent(label) else zeros(*game.shape)


def reduced_normal_form(stage: TwoStageGame) -> BimatrixGame:
    """Strategic form of the two-stage game.

    Offeree actions are labelled ``"A T"``, ``"D B"`` and so on; co-player
    plans are labelled ``"L,R"`` meaning L after Accept and R after Decline.
    External tables are carried through (zeros where a subgame lacks one).
    """
    acc, dec = stage.accept_game, stage.decline_game
    if acc.shape != dec.shape:
        raise GameInputError("subgames must have the same shape")
    offeree, co = stage.offeree, stage.co_player
    own_labels = [f"{d[0]} {a}" for d in DECISIONS for a in acc.actions(offeree)]
    co_actions = acc.actions(co)
    plan_labels = [f"{x},{y}" for x, y in product(co_actions, repeat=2)]
    n_own, n_plan = len(own_labels), len(plan_labels)

    def entry(table_of, own: int, plan: int) -> Fraction:
        decision, a = stage.decode_offeree_action(own)
        after_accept, after_decline = stage.decode_plan(plan)
        c = after_accept if decision == ACCEPT else after_decline
        game = stage.subgame(decision)
        m = table_of(game)
        return m[a][c] if offeree == ROW else m[c][a]

    def build(table_of):
        grid = [[entry(table_of, o, p) for p in range(n_plan)] for o in range(n_own)]
        return grid if offeree == ROW else [list(r) for r in zip(*grid)]

    externals = tuple(
        (label, build(lambda g, label=label: _external_or_zero(g, label)))
        for label in stage.external_labels()
    )
    row_payoffs = build(lambda g: g.row_payoffs)
    col_payoffs = build(lambda g: g.col_payoffs)
    if offeree == ROW:
        return BimatrixGame(own_labels, plan_labels, row_payoffs, col_payoffs, externals)
    return BimatrixGame(plan_labels, own_labels, row_payoffs, col_payoffs, externals)


@dataclass(frozen=True)
class SpePath:
    """Equilibrium path: the offeree's decision, the play that follows, and everyone's payoff."""

    decision: str
    profile: ActionProfile
    labels: tuple[str, str]
    payoffs: dict[str, Fraction] = field(hash=False)

    def to_dict(self) -> dict[str, Any]:
        return {
            "decision": self.decision,
            "profile": list(self.labels),
            "payoffs": {k: fraction_to_json(v) for k, v in self.payoffs.items()},
        }


def unique_nash(game: BimatrixGame, what: str = "game") -> ActionProfile:
    eqs = pure_nash(game)
    if len(eqs) != 1:
        raise UnsupportedStructureError(
            f"{what} has {len(eqs)} pure Nash equilibria; exactly one is required", eqs
        )
    return eqs[0]


def subgame_perfect(stage: TwoStageGame) -> SpePath:
    """Backward induction: Nash play in each subgame, then the offeree's better branch.

    An indifferent offeree declines.
    """
    outcomes = {}
    for decision in DECISIONS:
        game = stage.subgame(decision)
        profile = unique_nash(game, f"{decision} subgame")
        outcomes[decision] = (game, profile)
    acc_game, acc_prof = outcomes[ACCEPT]
    dec_game, dec_prof = outcomes[DECLINE]
    accept_value = acc_game.table(stage.offeree)[acc_prof.row][acc_prof.col]
    decline_value = dec_game.table(stage.offeree)[dec_prof.row][dec_prof.col]
    decision = ACCEPT if accept_value > decline_value else DECLINE
    game, profile = outcomes[decision]
    return SpePath(decision, profile, profile.labels(game), game.cell(profile))


@dataclass(frozen=True)
class ChainPath:
    """Solution of the second-manipulator chronology.

    ``decision`` is the first manipulator's answer to the second offer,
    ``path`` the resulting offeree decision and play, and ``branches`` the
    continuation for each possible answer.
    """

    manipulator: str
    decision: str
    path: SpePath
    branches: dict[str, SpePath] = field(hash=False)

    def to_dict(self) -> dict[str, Any]:
        return {
            "manipulator": self.manipulator,
            "decision": self.decision,
            "path": self.path.to_dict(),
            "branches": {k: v.to_dict() for k, v in self.branches.items()},
        }


def backward_induction_chain(base: BimatrixGame, first, second) -> ChainPath:
    """Solve the first manipulator's choice, then the offeree's, then play.

    ``first`` is a BindingOffer from an external agent, ``second`` a
    SecondOrderOffer to that agent.  The manipulator keeps the branch with
    the higher bookkeeping payoff; ties go to Decline.
    """
    from .contracts import apply_second_order

    m1 = second.offeree
    branches = {}
    for decision in DECISIONS:
        acc, dec = apply_second_order(base, first, second, m1_accepts=decision == ACCEPT)
        branches[decision] = subgame_perfect(TwoStageGame(acc, dec, first.offeree))
    chosen = ACCEPT if branches[ACCEPT].payoffs[m1] > branches[DECLINE].payoffs[m1] else DECLINE
    return ChainPath(m1, chosen, branches[chosen], branches)


# -- reporting --------------------------------------------------------------

def analysis_report(game: BimatrixGame, stage: TwoStageGame | None = None) -> dict[str, Any]:
    """Analysis JSON document: pure Nash, dominated actions, elimination log, SPE."""
    report: dict[str, Any] = {
        "pure_nash": [
            {
                "profile": list(p.labels(game)),
                "payoffs": {k: fraction_to_json(v) for k, v in game.cell(p).items()},
            }
            for p in pure_nash(game)
        ],
        "dominated": {
            "row": [game.row_actions[i] for i in sorted(strictly_dominated(game, ROW))],
            "col": [game.col_actions[j] for j in sorted(strictly_dominated(game, COL))],
        },
        "elimination_log": [
            {"round": s.round, "player": s.player, "action": s.action}
            for s in iterated_elimination(game)[1]
        ],
        "spe": None,
    }
    if stage is not None:
        report["spe"] = subgame_perfect(stage).to_dict()
    return report
