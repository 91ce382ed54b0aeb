"""Binding offers, counter-offers and second-order offers as game transformations.

An offer has the form "pay me ``accept_fee``, or if you decline I pay you
``decline_reward`` whenever you play ``contingent_action``".  Accepting or
declining each yields a new :class:`BimatrixGame`; the pair forms the
two-stage game the offeree faces.

Every transformation moves value between agents and never creates it, so
the total payoff at each profile is preserved.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from .errors import GameInputError, UnsupportedStructureError
from .game import (
    COL,
    PLAYERS,
    ROW,
    BimatrixGame,
    fraction_to_json,
    map_table,
    to_fraction,
)


def other_player(player: str) -> str:
    if player == ROW:
        return COL
    if player == COL:
        return ROW
    raise GameInputError(f"not a player: {player!r}")


def _nonneg(name: str, value: Any) -> Fraction:
    value = to_fraction(value)
    if value < 0:
        raise GameInputError(f"{name} must be >= 0, got {value}")
    return value


@dataclass(frozen=True)
class BindingOffer:
    """Either pay ``accept_fee``, or receive ``decline_reward`` whenever you play ``contingent_action``."""

    offeror: str
    offeree: str
    accept_fee: Fraction
    decline_reward: Fraction
    contingent_action: str

    def __post_init__(self):
        if self.offeree not in PLAYERS:
            raise GameInputError(f"offeree must be Row or Col, got {self.offeree!r}")
        if not self.offeror or self.offeror == self.offeree:
            raise GameInputError("offeror and offeree must differ")
        object.__setattr__(self, "accept_fee", _nonneg("accept_fee", self.accept_fee))
        object.__setattr__(self, "decline_reward", _nonneg("decline_reward", self.decline_reward))

    def contingent_index(self, game: BimatrixGame) -> int:
        return game.action_index(self.offeree, self.contingent_action)


@dataclass(frozen=True)
class CounterOffer:
    """Offeree commits to pay ``transfer`` to the co-player whenever the co-player plays ``co_player_action``."""

    proposer: str
    transfer: Fraction
    co_player_action: str

    def __post_init__(self):
        if self.proposer not in PLAYERS:
            raise GameInputError(f"counter-offer proposer must be Row or Col, got {self.proposer!r}")
        object.__setattr__(self, "transfer", _nonneg("transfer", self.transfer))

    @property
    def co_player(self) -> str:
        return other_player(self.proposer)

    def co_player_index(self, game: BimatrixGame) -> int:
        return game.action_index(self.co_player, self.co_player_action)


@dataclass(frozen=True)
class SecondOrderOffer:
    """One external agent's offer to another: pay ``accept_fee``, or I distort your Decline game.

    ``decline_distortion`` is counter-offer shaped: its ``proposer`` names
    the first offer's offeree, and the payment to that player's co-player
    is funded by ``offeror``.
    """

    offeror: str
    offeree: str
    accept_fee: Fraction
    decline_distortion: CounterOffer

    def __post_init__(self):
        if self.offeror in PLAYERS or self.offeree in PLAYERS:
            raise GameInputError("second-order offers are between external agents")
        if not self.offeror or self.offeror == self.offeree:
            raise GameInputError("offeror and offeree must differ")
        object.__setattr__(self, "accept_fee", _nonneg("accept_fee", self.accept_fee))


@dataclass(frozen=True)
class ManipulationClass:
    """Who is asked to pay, who receives the contingent payment, and whether the payer ends up better off."""

    t1: str
    t2: str
    w: str  # "win" | "lose" | "neutral"


# -- transformations --------------------------------------------------------

def _transfer(game: BimatrixGame, payer: str, payee: str, amount: Fraction, mask) -> BimatrixGame:
    if amount == 0:
        # still materialise a missing external table so downstream shapes agree
        game = game.with_external(payer).with_external(payee)
        return game
    game = map_table(game, payer, lambda i, j, v: v - amount if mask(i, j) else v)
    return map_table(game, payee, lambda i, j, v: v + amount if mask(i, j) else v)


def _action_mask(player: str, index: int):
    if player == ROW:
        return lambda i, j: i == index
    return lambda i, j: j == index


def apply_accept(base: BimatrixGame, offer: BindingOffer) -> BimatrixGame:
    """The game after the offeree pays the fee: a flat transfer on every profile."""
    offer.contingent_index(base)
    return _transfer(base, offer.offeree, offer.offeror, offer.accept_fee, lambda i, j: True)


def apply_decline(base: BimatrixGame, offer: BindingOffer) -> BimatrixGame:
    x = offer.contingent_index(base)
    return _transfer(base, offer.offeror, offer.offeree, offer.decline_reward, _action_mask(offer.offeree, x))


def apply_counter_decline(base: BimatrixGame, offer: BindingOffer, counter: CounterOffer) -> BimatrixGame:
    """Decline game plus the offeree's conditional payment to the co-player."""
    if counter.proposer != offer.offeree:
        raise GameInputError(
            f"counter-offer proposer {counter.proposer!r} is not the offeree {offer.offeree!r}"
        )
    declined = apply_decline(base, offer)
    k = counter.co_player_index(base)
    return _transfer(declined, counter.proposer, counter.co_player, counter.transfer, _action_mask(counter.co_player, k))


def apply_second_order(
    base: BimatrixGame, first: BindingOffer, second: SecondOrderOffer, m1_accepts: bool
) -> tuple[BimatrixGame, BimatrixGame]:
    """Accept and Decline subgames of ``first`` once the first offeror has answered ``second``.

    If the first offeror accepts, the fee moves to ``second.offeror`` on every
    profile of both subgames.  Otherwise the Decline subgame carries the
    distortion: the co-player is paid on its chosen action, funded by
    ``second.offeror``.
    """
    if first.offeror != second.offeree:
        raise GameInputError(
            f"second offer targets {second.offeree!r} but the first offer was made by {first.offeror!r}"
        )
    if first.offeror in PLAYERS:
        raise GameInputError("second-order offers require an external first offeror")
    accept_game = apply_accept(base, first)
    decline_game = apply_decline(base, first)
    m1, m2 = second.offeree, second.offeror
    everywhere = lambda i, j: True  # noqa: E731
    if m1_accepts:
        accept_game = _transfer(accept_game, m1, m2, second.accept_fee, everywhere)
        decline_game = _transfer(decline_game, m1, m2, second.accept_fee, everywhere)
    else:
        distortion = second.decline_distortion
        if distortion.proposer != first.offeree:
            raise GameInputError("decline distortion must name the first offer's offeree as proposer")
        k = distortion.co_player_index(base)
        accept_game = accept_game.with_external(m2)
        decline_game = _transfer(
            decline_game, m2, distortion.co_player, distortion.transfer, _action_mask(distortion.co_player, k)
        )
    return accept_game, decline_game


# -- inequality checks ------------------------------------------------------

@dataclass(frozen=True)
class PrimaryConditions:
    """Inequalities under which a fee offer to a one-sided dominant game succeeds.

    Written for the canonical orientation: offeree on rows, contingent action
    first (Top), co-player's Decline-game reply first (Left).
    """

    reward_flips_top_vs_right: bool  # a12 + c2 > a22 > a12
    accepting_beats_declining: bool  # a22 - c1 > a11 + c2
    co_player_prefers_left_vs_top: bool  # b11 > b12
    top_holds_vs_left: bool  # a11 + c2 >= a21

    def all(self) -> bool:
        return all(self.as_dict().values())

    def as_dict(self) -> dict[str, bool]:
        return {
            "reward_flips_top_vs_right": self.reward_flips_top_vs_right,
            "accepting_beats_declining": self.accepting_beats_declining,
            "co_player_prefers_left_vs_top": self.co_player_prefers_left_vs_top,
            "top_holds_vs_left": self.top_holds_vs_left,
        }


@dataclass(frozen=True)
class CounterConditions:
    transfer_flips_co_player: bool  # b12 < b11 < b12 + d2
    counter_leaves_offeree_better: bool  # a11 + c2 < a12 - d2

    def all(self) -> bool:
        return self.transfer_flips_co_player and self.counter_leaves_offeree_better

    def as_dict(self) -> dict[str, bool]:
        return {
            "transfer_flips_co_player": self.transfer_flips_co_player,
            "counter_leaves_offeree_better": self.counter_leaves_offeree_better,
        }


def canonical_tables(
    base: BimatrixGame, offer: BindingOffer, co_player_target: int | None = None
) -> tuple[list[list[Fraction]], list[list[Fraction]]]:
    """Offeree and co-player tables relabelled into canonical 2x2 orientation.

    Rows index the offeree's actions with the contingent action first.  If
    ``co_player_target`` is given, columns are ordered so that it comes second.
    """
    if base.shape != (2, 2):
        raise GameInputError(f"condition checks need a 2x2 game, got {base.shape[0]}x{base.shape[1]}")
    if offer.offeree == ROW:
        a = [list(r) for r in base.row_payoffs]
        b = [list(r) for r in base.col_payoffs]
    else:
        a = [list(r) for r in zip(*base.col_payoffs)]
        b = [list(r) for r in zip(*base.row_payoffs)]
    if offer.contingent_index(base) == 1:
        a.reverse()
        b.reverse()
    if co_player_target == 0:
        a = [r[::-1] for r in a]
        b = [r[::-1] for r in b]
    return a, b


def check_primary_conditions(base: BimatrixGame, offer: BindingOffer) -> PrimaryConditions:
    a, b = canonical_tables(base, offer)
    c1, c2 = offer.accept_fee, offer.decline_reward
    return PrimaryConditions(
        reward_flips_top_vs_right=a[0][1] + c2 > a[1][1] > a[0][1],
        accepting_beats_declining=a[1][1] - c1 > a[0][0] + c2,
        co_player_prefers_left_vs_top=b[0][0] > b[0][1],
        top_holds_vs_left=a[0][0] + c2 >= a[1][0],
    )


def check_counter_conditions(base: BimatrixGame, offer: BindingOffer, counter: CounterOffer) -> CounterConditions:
    if counter.proposer != offer.offeree:
        raise GameInputError("counter-offer proposer must be the offeree")
    a, b = canonical_tables(base, offer, counter.co_player_index(base))
    c2, d2 = offer.decline_reward, counter.transfer
    return CounterConditions(
        transfer_flips_co_player=b[0][1] < b[0][0] < b[0][1] + d2,
        counter_leaves_offeree_better=a[0][0] + c2 < a[0][1] - d2,
    )


def classify_manipulation(base: BimatrixGame, offer: BindingOffer) -> ManipulationClass:
    from .equilibria import TwoStageGame, pure_nash, subgame_perfect

    base_nash = pure_nash(base)
    if len(base_nash) != 1:
        raise UnsupportedStructureError(
            f"base game needs a unique pure Nash equilibrium, found {len(base_nash)}", base_nash
        )
    stage = TwoStageGame(apply_accept(base, offer), apply_decline(base, offer), offer.offeree)
    spe = subgame_perfect(stage)
    before = base.table(offer.offeree)[base_nash[0].row][base_nash[0].col]
    after = spe.payoffs[offer.offeree]
    w = "win" if after > before else "lose" if after < before else "neutral"
    return ManipulationClass(t1=offer.offeree, t2=offer.offeree, w=w)


# -- JSON -------------------------------------------------------------------

def _get(doc: dict, key: str, kind: str):
    try:
        return doc[key]
    except (KeyError, TypeError):
        raise GameInputError(f"{kind} document missing field {key!r}") from None


def offer_from_dict(doc: dict[str, Any]) -> BindingOffer:
    return BindingOffer(
        offeror=str(_get(doc, "offeror", "offer")),
        offeree=str(_get(doc, "offeree", "offer")),
        accept_fee=_get(doc, "accept_fee", "offer"),
        decline_reward=_get(doc, "decline_reward", "offer"),
        contingent_action=str(_get(doc, "contingent_action", "offer")),
    )


def offer_to_dict(offer: BindingOffer) -> dict[str, Any]:
    return {
        "offeror": offer.offeror,
        "offeree": offer.offeree,
        "accept_fee": fraction_to_json(offer.accept_fee),
        "decline_reward": fraction_to_json(offer.decline_reward),
        "contingent_action": offer.contingent_action,
    }


def counter_from_dict(doc: dict[str, Any]) -> CounterOffer:
    return CounterOffer(
        proposer=str(_get(doc, "proposer", "counter-offer")),
        transfer=_get(doc, "transfer", "counter-offer"),
        co_player_action=str(_get(doc, "co_player_action", "counter-offer")),
    )


def counter_to_dict(counter: CounterOffer) -> dict[str, Any]:
    return {
        "proposer": counter.proposer,
        "transfer": fraction_to_json(counter.transfer),
        "co_player_action": counter.co_player_action,
    }


def second_order_from_dict(doc: dict[str, Any]) -> SecondOrderOffer:
    return SecondOrderOffer(
        offeror=str(_get(doc, "offeror", "second-order offer")),
        offeree=str(_get(doc, "offeree", "second-order offer")),
        accept_fee=_get(doc, "accept_fee", "second-order offer"),
        decline_distortion=counter_from_dict(_get(doc, "decline_distortion", "second-order offer")),
    )


def second_order_to_dict(offer: SecondOrderOffer) -> dict[str, Any]:
    return {
        "offeror": offer.offeror,
        "offeree": offer.offeree,
        "accept_fee": fraction_to_json(offer.accept_fee),
        "decline_distortion": counter_to_dict(offer.decline_distortion),
    }
