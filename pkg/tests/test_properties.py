"""Randomized checks across modules."""

import random
from fractions import Fraction as F

from hypothesis import given, settings
from hypothesis import strategies as st

from gamemanip.contracts import (
    BindingOffer,
    CounterOffer,
    SecondOrderOffer,
    apply_accept,
    apply_counter_decline,
    apply_decline,
    apply_second_order,
    check_counter_conditions,
    check_primary_conditions,
)
from gamemanip.equilibria import TwoStageGame, pure_nash, strictly_dominated, subgame_perfect
from gamemanip.game import BimatrixGame, dumps_game, loads_game
from oracles import profile_totals

rationals = st.builds(F, st.integers(-60, 60), st.integers(1, 6))
amounts = st.builds(F, st.integers(0, 40), st.integers(1, 4))


@st.composite
def games(draw, min_dim=1, max_dim=4, externals=True):
    m = draw(st.integers(min_dim, max_dim))
    n = draw(st.integers(min_dim, max_dim))
    table = lambda: [[draw(rationals) for _ in range(n)] for _ in range(m)]  # noqa: E731
    ext = (("M1", table()),) if externals and draw(st.booleans()) else ()
    return BimatrixGame([f"r{i}" for i in range(m)], [f"c{j}" for j in range(n)], table(), table(), ext)


@st.composite
def offers(draw, game):
    offeree = draw(st.sampled_from(["Row", "Col"]))
    offeror = draw(st.sampled_from(["M1", "M2", "Col" if offeree == "Row" else "Row"]))
    actions = game.row_actions if offeree == "Row" else game.col_actions
    return BindingOffer(offeror, offeree, draw(amounts), draw(amounts), draw(st.sampled_from(actions)))


@settings(max_examples=500, deadline=None)
@given(st.data())
def test_transfers_conserve_profile_totals(data):
    game = data.draw(games())
    offer = data.draw(offers(game))
    want = profile_totals(game)
    assert profile_totals(apply_accept(game, offer)) == want
    assert profile_totals(apply_decline(game, offer)) == want
    co_actions = game.col_actions if offer.offeree == "Row" else game.row_actions
    counter = CounterOffer(offer.offeree, data.draw(amounts), data.draw(st.sampled_from(co_actions)))
    assert profile_totals(apply_counter_decline(game, offer, counter)) == want
    if offer.offeror.startswith("M"):
        second = SecondOrderOffer("M9", offer.offeror, data.draw(amounts), counter)
        for m1_accepts in (True, False):
            for g in apply_second_order(game, offer, second, m1_accepts):
                assert profile_totals(g) == want


@settings(max_examples=200, deadline=None)
@given(games())
def test_game_json_roundtrip(game):
    assert loads_game(dumps_game(game)) == game


@settings(max_examples=200, deadline=None)
@given(games(externals=False))
def test_external_offers_leave_equilibria_alone(game):
    # an external offeror's payments only touch bookkeeping tables
    offer = BindingOffer("M1", "Row", 0, 0, game.row_actions[0])
    assert pure_nash(apply_decline(game, offer)) == pure_nash(game)


def one_sided_instance(rng):
    """Random 2x2 base with B strictly dominant for Row and Col answering B with R, plus an offer."""
    while True:
        a21, a12 = rng.randint(-10, 10), rng.randint(-10, 10)
        a11 = a21 - rng.randint(1, 5)
        a22 = a12 + rng.randint(1, 5)
        b = [[rng.randint(-10, 10) for _ in range(2)] for _ in range(2)]
        b[1][1] = b[1][0] + rng.randint(1, 5)
        c1, c2 = F(rng.randint(0, 20), 2), F(rng.randint(0, 20), 2)
        d2 = F(rng.randint(0, 20), 2)
        base = BimatrixGame(["T", "B"], ["L", "R"], [[a11, a12], [a21, a22]], b)
        offer = BindingOffer("M1", "Row", c1, c2, "T")
        if check_primary_conditions(base, offer).all():
            return base, offer, CounterOffer("Row", d2, "R")


def test_conditions_predict_structure():
    rng = random.Random(11)
    with_counter = 0
    for _ in range(500):
        base, offer, counter = one_sided_instance(rng)
        acc, dec = apply_accept(base, offer), apply_decline(base, offer)
        assert strictly_dominated(acc, "Row") == {0}
        # Top weakly dominates after a Decline, strictly once the last inequality is strict
        A = dec.row_payoffs
        assert A[0][0] >= A[1][0] and A[0][1] > A[1][1]
        if A[0][0] > A[1][0]:
            assert strictly_dominated(dec, "Row") == {1}
        assert [p.labels(dec) for p in pure_nash(dec)] == [("T", "L")]
        assert subgame_perfect(TwoStageGame(acc, dec)).decision == "Accept"
        if check_counter_conditions(base, offer, counter).all():
            with_counter += 1
            ctr = apply_counter_decline(base, offer, counter)
            assert [p.labels(ctr) for p in pure_nash(ctr)] == [("T", "R")]
    assert with_counter > 20
