"""Command-line front end.

    gamemanip analyze  --game base.json [--offer offer.json [--counter c.json]]
    gamemanip check    --game base.json --offer offer.json [--counter c.json]
    gamemanip spe      --game base.json --offer offer.json [--counter c.json | --second s.json]
    gamemanip simulate --game g.json [--offer ...] --method mwua --out traj.csv
    gamemanip scenario --id 2 --method replicator --out traj.csv

Reports are JSON on stdout (or ``--report``); trajectories are CSV.
Exit status: 0 ok, 1 input error, 2 unsupported structure or numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any

from .contracts import (
    apply_accept,
    apply_counter_decline,
    apply_decline,
    check_counter_conditions,
    check_primary_conditions,
    classify_manipulation,
    counter_from_dict,
    offer_from_dict,
    second_order_from_dict,
)
from .dynamics import diagnose_convergence, mwua_run, replicator_run
from .equilibria import TwoStageGame, analysis_report, backward_induction_chain, reduced_normal_form, subgame_perfect
from .errors import GameInputError, NumericalFailureError, UnsupportedStructureError
from .game import game_from_dict
from .scenarios import DynamicsParams, build_scenario, run_scenario


@dataclass(frozen=True)
class RunConfig:
    command: str
    game: str | None = None
    offer: str | None = None
    counter: str | None = None
    second: str | None = None
    scenario_id: int | None = None
    method: str = "mwua"
    eta: float = 0.5
    steps: int = 100_000
    step_size: float = 0.01
    horizon: float = 1000.0
    mode: str = "expected"
    seed: int | None = None
    stride: int | None = None
    out: str | None = None
    report: str | None = None
    sweep: str | None = None
    epsilon_conv: float = 0.01
    window: int = 100

    def __post_init__(self):
        if not 0 < self.eta <= 0.5:
            raise GameInputError(f"--eta must lie in (0, 0.5], got {self.eta}")
        if self.steps < 1:
            raise GameInputError("--steps must be >= 1")
        if self.step_size <= 0 or self.horizon <= 0:
            raise GameInputError("--step-size and --horizon must be positive")
        if self.stride is not None and self.stride < 1:
            raise GameInputError("--stride must be >= 1")
        if not 0 <= self.epsilon_conv < 1 or self.window < 1:
            raise GameInputError("--epsilon-conv must lie in [0, 1) and --window be >= 1")

    def dynamics_params(self) -> DynamicsParams:
        return DynamicsParams(
            eta=self.eta,
            steps=self.steps,
            mode=self.mode,
            seed=self.seed,
            mwua_stride=self.stride or 1,
            step_size=self.step_size,
            horizon=self.horizon,
            replicator_stride=self.stride or 100,
            epsilon_conv=self.epsilon_conv,
            window=self.window,
        )


def _read_json(path: str, what: str) -> Any:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise GameInputError(f"cannot read {what} file {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise GameInputError(f"{what} file {path} is not valid JSON: {exc}") from None


def _need(value, flag: str):
    if value is None:
        raise GameInputError(f"{flag} is required for this command")
    return value


def _load(cfg: RunConfig):
    game = game_from_dict(_read_json(_need(cfg.game, "--game"), "game"))
    offer = offer_from_dict(_read_json(cfg.offer, "offer")) if cfg.offer else None
    counter = counter_from_dict(_read_json(cfg.counter, "counter-offer")) if cfg.counter else None
    second = second_order_from_dict(_read_json(cfg.second, "second-order offer")) if cfg.second else None
    if (counter or second) and offer is None:
        raise GameInputError("--counter and --second need --offer")
    if counter and second:
        raise GameInputError("--counter and --second are mutually exclusive")
    return game, offer, counter, second


def _stage(game, offer, counter) -> TwoStageGame:
    decline = apply_counter_decline(game, offer, counter) if counter else apply_decline(game, offer)
    return TwoStageGame(apply_accept(game, offer), decline, offer.offeree)


def _emit(doc: Any, path: str | None) -> None:
    text = json.dumps(doc, indent=2) + "\n"
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _write_csv(traj, path: str | None) -> None:
    if path:
        Path(path).write_text(traj.to_csv(), encoding="utf-8")


def cmd_analyze(cfg: RunConfig) -> None:
    game, offer, counter, second = _load(cfg)
    if second:
        raise GameInputError("analyze does not take --second; use spe")
    if offer is None:
        _emit(analysis_report(game), cfg.report)
        return
    stage = _stage(game, offer, counter)
    _emit(analysis_report(reduced_normal_form(stage), stage), cfg.report)


def cmd_check(cfg: RunConfig) -> None:
    game, offer, counter, _ = _load(cfg)
    offer = _need(offer, "--offer")
    primary = check_primary_conditions(game, offer)
    doc: dict[str, Any] = {"primary": primary.as_dict(), "primary_all": primary.all()}
    if counter:
        cc = check_counter_conditions(game, offer, counter)
        doc["counter"] = cc.as_dict()
        doc["counter_all"] = cc.all()
    try:
        cls = classify_manipulation(game, offer)
        doc["classification"] = {"t1": cls.t1, "t2": cls.t2, "w": cls.w}
    except UnsupportedStructureError as exc:
        doc["classification"] = None
        doc["classification_error"] = str(exc)
    _emit(doc, cfg.report)


def cmd_spe(cfg: RunConfig) -> None:
    game, offer, counter, second = _load(cfg)
    offer = _need(offer, "--offer")
    if second:
        _emit(backward_induction_chain(game, offer, second).to_dict(), cfg.report)
    else:
        _emit(subgame_perfect(_stage(game, offer, counter)).to_dict(), cfg.report)


def _simulate_one(cfg: RunConfig) -> dict[str, Any]:
    game, offer, counter, second = _load(cfg)
    if second:
        raise GameInputError("simulate does not take --second; use the scenario command")
    target = game
    stage = None
    if offer:
        stage = _stage(game, offer, counter)
        target = reduced_normal_form(stage)
    if cfg.method == "mwua":
        traj = mwua_run(target, cfg.eta, cfg.steps, cfg.mode, cfg.seed, cfg.stride or 1)
    else:
        traj = replicator_run(target, "uniform", cfg.step_size, cfg.horizon, cfg.stride or 100)
    _write_csv(traj, cfg.out)
    verdict = diagnose_convergence(traj, stage or target, cfg.epsilon_conv, cfg.window)
    return {
        "method": traj.method,
        "payoff_normalizer": str(traj.payoff_normalizer),
        "final": {"row": traj.x[-1].tolist(), "col": traj.y[-1].tolist()},
        "verdict": verdict.to_dict(),
    }


_SWEEP_KEYS = {"method", "eta", "steps", "step_size", "horizon", "mode", "seed", "stride", "epsilon_conv", "window"}


def cmd_simulate(cfg: RunConfig) -> None:
    if not cfg.sweep:
        _emit(_simulate_one(cfg), cfg.report)
        return
    entries = _read_json(cfg.sweep, "sweep")
    if not isinstance(entries, list):
        raise GameInputError("sweep file must hold a JSON list of parameter objects")
    runs = []
    for k, entry in enumerate(entries):
        unknown = set(entry) - _SWEEP_KEYS
        if unknown:
            raise GameInputError(f"sweep entry {k}: unknown keys {sorted(unknown)}")
        out = None
        if cfg.out:
            p = Path(cfg.out)
            out = str(p.with_name(f"{p.stem}-{k}{p.suffix}"))
        runs.append(replace(cfg, sweep=None, out=out, **entry))
    with ProcessPoolExecutor() as pool:
        results = list(pool.map(_simulate_one, runs))
    _emit([{"run": k, **r} for k, r in enumerate(results)], cfg.report)


def cmd_scenario(cfg: RunConfig) -> None:
    spec = build_scenario(_need(cfg.scenario_id, "--id"))
    report = run_scenario(spec, cfg.dynamics_params())
    _write_csv(report.trajectories[cfg.method], cfg.out)
    _emit(report.to_dict(), cfg.report)


COMMANDS = {
    "analyze": cmd_analyze,
    "check": cmd_check,
    "spe": cmd_spe,
    "simulate": cmd_simulate,
    "scenario": cmd_scenario,
}


class _Parser(argparse.ArgumentParser):
    # usage mistakes are input errors (status 1), not argparse's default 2
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="gamemanip",
        description="Binding-contract game manipulation: equilibria and learning dynamics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def inputs(p, offer_required=False):
        p.add_argument("--game", metavar="FILE", required=True, help="game JSON document")
        p.add_argument("--offer", metavar="FILE", required=offer_required, help="binding offer JSON")
        p.add_argument("--counter", metavar="FILE", help="counter-offer JSON")
        p.add_argument("--report", metavar="FILE", help="write the JSON report here instead of stdout")

    def dynamics(p):
        p.add_argument("--method", choices=["mwua", "replicator"], default="mwua")
        p.add_argument("--eta", type=float, default=0.5, help="learning rate, in (0, 0.5] (default: %(default)s)")
        p.add_argument("--steps", type=int, default=100_000, help="MWUA rounds (default: %(default)s)")
        p.add_argument("--step-size", type=float, default=0.01, help="RK4 step (default: %(default)s)")
        p.add_argument("--horizon", type=float, default=1000.0, help="replicator end time (default: %(default)s)")
        p.add_argument("--mode", choices=["expected", "sampled"], default="expected")
        p.add_argument("--seed", type=int, default=None, help="RNG seed; GM_SEED overrides")
        p.add_argument("--stride", type=int, default=None, help="keep every k-th sample (MWUA 1, replicator 100)")
        p.add_argument("--out", metavar="FILE", help="trajectory CSV")
        p.add_argument("--epsilon-conv", type=float, default=0.01)
        p.add_argument("--window", type=int, default=100, help="samples checked for stable support")

    inputs(sub.add_parser("analyze", help="pure Nash, dominance, elimination (and SPE with --offer)"))
    p = sub.add_parser("check", help="evaluate the offer and counter-offer inequalities")
    inputs(p, offer_required=True)
    p = sub.add_parser("spe", help="subgame perfect path of an offer game")
    inputs(p, offer_required=True)
    p.add_argument("--second", metavar="FILE", help="second-order offer JSON; solves the full chain")
    p = sub.add_parser("simulate", help="run MWUA or replicator dynamics")
    inputs(p)
    dynamics(p)
    p.add_argument("--sweep", metavar="FILE", help="JSON list of parameter overrides, one run each")
    p = sub.add_parser("scenario", help="reproduce one of the four built-in scenarios")
    p.add_argument("--id", dest="scenario_id", type=int, required=True, choices=[1, 2, 3, 4])
    p.add_argument("--report", metavar="FILE", help="write the JSON report here instead of stdout")
    dynamics(p)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    fields = {k: v for k, v in vars(args).items() if k in RunConfig.__dataclass_fields__}
    env_seed = os.environ.get("GM_SEED")
    try:
        if env_seed is not None:
            try:
                fields["seed"] = int(env_seed)
            except ValueError:
                raise GameInputError(f"GM_SEED must be an integer, got {env_seed!r}") from None
        cfg = RunConfig(**fields)
        COMMANDS[cfg.command](cfg)
    except GameInputError as exc:
        print(f"gamemanip: error: {exc}", file=sys.stderr)
        return 1
    except (UnsupportedStructureError, NumericalFailureError) as exc:
        print(f"gamemanip: unsupported: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"gamemanip: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
