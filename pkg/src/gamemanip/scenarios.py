"""The four manipulation scenarios on the base game, built and run end to end.

1. Col offers Row a fee-or-reward contract.
2. An external manipulator M1 makes the same offer.
3. As 2, with Row's counter-offer to Col.
4. As 2, with a second manipulator M2 making an offer to M1.

Subgames and reduced normal forms are always produced by the contract
transformations; ``reference_tables.json`` holds the printed tables and is
only read to report whether the two agree.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from typing import Any

from .contracts import (
    BindingOffer,
    CounterOffer,
    SecondOrderOffer,
    apply_accept,
    apply_counter_decline,
    apply_decline,
    apply_second_order,
    counter_to_dict,
    offer_to_dict,
    second_order_to_dict,
)
from .dynamics import ConvergenceVerdict, Trajectory, diagnose_convergence, mwua_run, replicator_run
from .equilibria import ChainPath, SpePath, TwoStageGame, analysis_report, backward_induction_chain, reduced_normal_form, subgame_perfect
from .errors import GameInputError
from .game import BimatrixGame, base_game, game_from_dict, game_to_dict

TITLES = {
    1: "Col makes an offer to Row",
    2: "first external manipulator",
    3: "Row's counter-offer",
    4: "second external manipulator",
}

# scenario id -> (accept subgame, decline subgame, reduced normal form)
REFERENCE_KEYS = {
    1: ("col_offer_accept", "col_offer_decline", "normal_form_1"),
    2: ("m1_accept", "m1_decline", "normal_form_2"),
    3: ("counter_accept", "counter_decline", "normal_form_3"),
    4: ("m2_accepted_accept", "m2_declined_decline", "normal_form_4"),
}


@lru_cache(maxsize=1)
def reference_tables() -> dict[str, BimatrixGame]:
    text = resources.files("gamemanip.data").joinpath("reference_tables.json").read_text(encoding="utf-8")
    return {k: game_from_dict(v) for k, v in json.loads(text).items()}


@dataclass(frozen=True)
class ScenarioSpec:
    id: int
    title: str
    base: BimatrixGame
    offer: BindingOffer
    counter: CounterOffer | None = None
    second: SecondOrderOffer | None = None
    # claimed outcomes: SPE and the play both dynamics settle on
    expected: dict[str, Any] = field(default_factory=dict, hash=False)

    def stage(self) -> TwoStageGame:
        """The Accept/Decline subgame pair the offeree faces.

        Scenario 4 uses the branch pair displayed for it: the Accept game
        after M1 accepted M2's offer, the Decline game after M1 declined.
        """
        if self.second is not None:
            accept_game, _ = apply_second_order(self.base, self.offer, self.second, m1_accepts=True)
            _, decline_game = apply_second_order(self.base, self.offer, self.second, m1_accepts=False)
        elif self.counter is not None:
            accept_game = apply_accept(self.base, self.offer)
            decline_game = apply_counter_decline(self.base, self.offer, self.counter)
        else:
            accept_game = apply_accept(self.base, self.offer)
            decline_game = apply_decline(self.base, self.offer)
        return TwoStageGame(accept_game, decline_game, self.offer.offeree)

    def normal_form(self) -> BimatrixGame:
        return reduced_normal_form(self.stage())

    def offers_dict(self) -> dict[str, Any]:
        doc: dict[str, Any] = {"offer": offer_to_dict(self.offer)}
        if self.counter is not None:
            doc["counter"] = counter_to_dict(self.counter)
        if self.second is not None:
            doc["second"] = second_order_to_dict(self.second)
        return doc


def build_scenario(scenario_id: int) -> ScenarioSpec:
    if scenario_id not in TITLES:
        raise GameInputError(f"unknown scenario id {scenario_id!r}; expected 1-4")
    base = base_game()
    offeror = "Col" if scenario_id == 1 else "M1"
    offer = BindingOffer(offeror, "Row", 3, 2, "T")
    counter = second = None
    if scenario_id == 3:
        counter = CounterOffer("Row", 2, "R")
    if scenario_id == 4:
        second = SecondOrderOffer("M2", "M1", 2, CounterOffer("Row", 2, "R"))
    if scenario_id in (1, 2):
        expected = {"spe": ("Accept", ("B", "R")), "dynamics": ("Decline", ("T", "L"))}
    else:
        expected = {"spe": ("Decline", ("T", "R")), "dynamics": ("Decline", ("T", "R"))}
    return ScenarioSpec(scenario_id, TITLES[scenario_id], base, offer, counter, second, expected)


@dataclass(frozen=True)
class DynamicsParams:
    eta: float = 0.5
    steps: int = 100_000
    mode: str = "expected"
    seed: int | None = None
    mwua_stride: int = 1
    step_size: float = 0.01
    horizon: float = 1000.0
    replicator_stride: int = 100
    epsilon_conv: float = 0.01
    window: int = 100


def table_mismatches(computed: BimatrixGame, reference: BimatrixGame) -> list[str]:
    """Cell-level differences between two games, as readable strings."""
    out = []
    if (computed.row_actions, computed.col_actions) != (reference.row_actions, reference.col_actions):
        return ["action labels differ"]
    if set(computed.agents) != set(reference.agents):
        out.append(f"agents differ: {computed.agents} vs {reference.agents}")
    for agent in reference.agents:
        if not computed.has_agent(agent):
            continue
        for i, r in enumerate(reference.table(agent)):
            for j, v in enumerate(r):
                got = computed.table(agent)[i][j]
                if got != v:
                    cell = f"({reference.row_actions[i]},{reference.col_actions[j]})"
                    out.append(f"{agent} at {cell}: computed {got}, reference {v}")
    return out


def scenario_tables(spec: ScenarioSpec) -> dict[str, BimatrixGame]:
    """Computed accept/decline/normal-form tables keyed like the reference file."""
    stage = spec.stage()
    acc_key, dec_key, nf_key = REFERENCE_KEYS[spec.id]
    return {acc_key: stage.accept_game, dec_key: stage.decline_game, nf_key: reduced_normal_form(stage)}


def check_tables(spec: ScenarioSpec) -> dict[str, list[str]]:
    refs = reference_tables()
    out = {"base": table_mismatches(spec.base, refs["base"])}
    for key, game in scenario_tables(spec).items():
        out[key] = table_mismatches(game, refs[key])
    return out


def _matches(verdict: ConvergenceVerdict, spe: SpePath) -> bool:
    play = verdict.induced_play
    return play is not None and play.decision == spe.decision and play.profile == spe.labels


@dataclass
class ScenarioReport:
    scenario: int
    title: str
    tables_match: bool
    table_mismatches: dict[str, list[str]]
    equilibria: dict[str, Any]
    spe: SpePath
    mwua_verdict: ConvergenceVerdict
    replicator_verdict: ConvergenceVerdict
    spe_vs_dynamics: str
    chain: ChainPath | None = None
    offeror_transfer: dict[str, str] = field(default_factory=dict)
    trajectories: dict[str, Trajectory] = field(default_factory=dict, repr=False)

    def to_dict(self) -> dict[str, Any]:
        doc = {
            "scenario": self.scenario,
            "title": self.title,
            "tables_match": self.tables_match,
            "table_mismatches": {k: v for k, v in self.table_mismatches.items() if v},
            "equilibria": self.equilibria,
            "spe": self.spe.to_dict(),
            "mwua_verdict": self.mwua_verdict.to_dict(),
            "replicator_verdict": self.replicator_verdict.to_dict(),
            "spe_vs_dynamics": self.spe_vs_dynamics,
            "offeror_transfer": self.offeror_transfer,
        }
        if self.chain is not None:
            doc["full_tree"] = self.chain.to_dict()
        return doc


def offeror_transfer(spec: ScenarioSpec, decision: str, labels: tuple[str, str]) -> Fraction:
    """Net amount the offeror gained at an outcome, relative to the base game at the same profile."""
    stage = spec.stage()
    game = stage.subgame(decision)
    profile = game.profile(*labels)
    got = game.table(spec.offer.offeror)[profile.row][profile.col]
    if spec.base.has_agent(spec.offer.offeror):
        got -= spec.base.table(spec.offer.offeror)[profile.row][profile.col]
    return got


def run_dynamics(game: BimatrixGame, params: DynamicsParams) -> dict[str, Trajectory]:
    return {
        "mwua": mwua_run(game, params.eta, params.steps, params.mode, params.seed, params.mwua_stride),
        "replicator": replicator_run(
            game, "uniform", params.step_size, params.horizon, params.replicator_stride
        ),
    }


def run_scenario(spec: ScenarioSpec, params: DynamicsParams | None = None) -> ScenarioReport:
    params = params or DynamicsParams()
    mismatches = check_tables(spec)
    stage = spec.stage()
    nf = reduced_normal_form(stage)
    spe = subgame_perfect(stage)
    trajs = run_dynamics(nf, params)
    verdicts = {
        name: diagnose_convergence(t, stage, params.epsilon_conv, params.window) for name, t in trajs.items()
    }
    agree = all(_matches(v, spe) for v in verdicts.values())
    chain = backward_induction_chain(spec.base, spec.offer, spec.second) if spec.second else None
    transfers = {"spe": str(offeror_transfer(spec, spe.decision, spe.labels))}
    play = verdicts["replicator"].induced_play
    if play is not None:
        transfers["dynamics"] = str(offeror_transfer(spec, play.decision, play.profile))
    return ScenarioReport(
        scenario=spec.id,
        title=spec.title,
        tables_match=not any(mismatches.values()),
        table_mismatches=mismatches,
        equilibria=analysis_report(nf, stage),
        spe=spe,
        mwua_verdict=verdicts["mwua"],
        replicator_verdict=verdicts["replicator"],
        spe_vs_dynamics="agree" if agree else "disagree",
        chain=chain,
        offeror_transfer=transfers,
        trajectories=trajs,
    )


def scenario_document(spec: ScenarioSpec) -> dict[str, Any]:
    """Static description of a scenario: offers plus computed tables."""
    return {
        "scenario": spec.id,
        "title": spec.title,
        "base": game_to_dict(spec.base),
        **spec.offers_dict(),
        "tables": {k: game_to_dict(g) for k, g in scenario_tables(spec).items()},
    }
