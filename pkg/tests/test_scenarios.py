import numpy as np
import pytest

from gamemanip.errors import GameInputError
from gamemanip.scenarios import (
    DynamicsParams,
    build_scenario,
    check_tables,
    offeror_transfer,
    run_scenario,
    scenario_document,
)


def test_unknown_scenario():
    with pytest.raises(GameInputError):
        build_scenario(5)


def test_scenario_one_tables_match(printed):
    spec = build_scenario(1)
    stage = spec.stage()
    assert stage.accept_game == printed["col_offer_accept"]
    assert stage.decline_game == printed["col_offer_decline"]
    assert not any(check_tables(spec).values())


def test_scenario_three_decline_cell():
    g = build_scenario(3).stage().decline_game
    assert g.cell(g.profile("T", "R")) == {"Row": 9, "Col": 15, "M1": -2}


def test_scenario_four_normal_form_cell():
    nf = build_scenario(4).normal_form()
    assert nf.cell(nf.profile("D T", "L,R")) == {"Row": 11, "Col": 15, "M1": -2, "M2": -2}


def test_scenario_four_printed_m2_mismatch_is_reported():
    # the printed Decline-branch M2 row copies M1's; computed M2 pays on R instead
    bad = check_tables(build_scenario(4))
    assert bad["m2_accepted_accept"] == []
    assert bad["m2_declined_decline"] == [
        "M2 at (T,L): computed 0, reference -2",
        "M2 at (B,R): computed -2, reference 0",
    ]


def test_scenarios_one_and_two_share_player_tables():
    a, b = build_scenario(1).normal_form(), build_scenario(2).normal_form()
    assert a.row_payoffs == b.row_payoffs
    assert a.external_labels == () and b.external_labels == ("M1",)


def test_offeror_transfers():
    s2 = build_scenario(2)
    assert offeror_transfer(s2, "Accept", ("B", "R")) == 3
    assert offeror_transfer(s2, "Decline", ("T", "L")) == -2
    # Col as offeror: net of its base payoff at the same profile
    s1 = build_scenario(1)
    assert offeror_transfer(s1, "Accept", ("B", "R")) == 3
    assert offeror_transfer(s1, "Decline", ("T", "L")) == -2


def test_scenario_document_shape():
    doc = scenario_document(build_scenario(3))
    assert set(doc) >= {"scenario", "title", "base", "offer", "counter", "tables"}
    assert set(doc["tables"]) == {"counter_accept", "counter_decline", "normal_form_3"}


def test_short_run_report_fields():
    params = DynamicsParams(steps=500, horizon=5)
    rep = run_scenario(build_scenario(3), params).to_dict()
    assert rep["spe"] == {"decision": "Decline", "profile": ["T", "R"], "payoffs": {"Row": 9, "Col": 15, "M1": -2}}
    assert set(rep) >= {"tables_match", "equilibria", "mwua_verdict", "replicator_verdict", "spe_vs_dynamics"}


@pytest.mark.slow
@pytest.mark.parametrize("sid", [1, 2, 3, 4])
def test_full_runs_match_claims(scenario_reports, sid):
    reports, _ = scenario_reports
    rep = reports[sid]
    spec = build_scenario(sid)
    decision, labels = spec.expected["spe"]
    assert (rep.spe.decision, rep.spe.labels) == (decision, labels)
    for verdict in (rep.mwua_verdict, rep.replicator_verdict):
        assert verdict.converged
        play = verdict.induced_play
        assert (play.decision, play.profile) == spec.expected["dynamics"]
    assert rep.spe_vs_dynamics == ("disagree" if sid in (1, 2) else "agree")
    if sid in (1, 2):
        assert rep.offeror_transfer == {"spe": "3", "dynamics": "-2"}
    if sid == 3:
        assert rep.offeror_transfer == {"spe": "-2", "dynamics": "-2"}
    if sid == 4:
        assert rep.chain.decision == "Accept"


@pytest.mark.slow
@pytest.mark.parametrize("sid", [1, 2, 3, 4])
def test_dominated_mass_decays(scenario_reports, sid):
    reports, _ = scenario_reports
    for traj in reports[sid].trajectories.values():
        rows = [traj.row_actions.index("A T"), traj.row_actions.index("D B")]
        mass = traj.x[:, rows].sum(axis=1)
        assert mass[-1] < 1e-3
        tail = mass[len(mass) // 2 :]
        assert np.all(np.diff(tail) <= 1e-15)
