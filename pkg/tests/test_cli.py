import json
from pathlib import Path

import pytest

from gamemanip.cli import main
from gamemanip.dynamics import Trajectory

INPUTS = Path(__file__).resolve().parent.parent / "inputs"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_analyze_base(capsys):
    code, out, _ = run(capsys, "analyze", "--game", INPUTS / "base.json")
    assert code == 0
    doc = json.loads(out)
    assert [p["profile"] for p in doc["pure_nash"]] == [["B", "R"]]
    assert doc["spe"] is None


def test_analyze_with_offer(capsys, tmp_path):
    report = tmp_path / "r.json"
    code, out, _ = run(
        capsys, "analyze", "--game", INPUTS / "base.json", "--offer", INPUTS / "offer_c1_3_c2_2.json", "--report", report
    )
    assert code == 0 and out == ""
    doc = json.loads(report.read_text())
    assert {tuple(p["profile"]) for p in doc["pure_nash"]} == {("D T", "L,L"), ("A B", "R,L")}
    assert doc["dominated"]["row"] == ["A T", "D B"]


def test_check(capsys):
    code, out, _ = run(
        capsys, "check", "--game", INPUTS / "base.json", "--offer", INPUTS / "offer_c1_3_c2_2.json",
        "--counter", INPUTS / "counter_d2_2.json",
    )
    doc = json.loads(out)
    assert code == 0 and doc["primary_all"] and doc["counter_all"]
    assert all(doc["primary"].values())
    assert doc["classification"] == {"t1": "Row", "t2": "Row", "w": "lose"}


def test_spe_and_chain(capsys):
    code, out, _ = run(capsys, "spe", "--game", INPUTS / "base.json", "--offer", INPUTS / "offer_m1.json")
    assert code == 0 and json.loads(out)["decision"] == "Accept"
    code, out, _ = run(
        capsys, "spe", "--game", INPUTS / "base.json", "--offer", INPUTS / "offer_m1.json",
        "--second", INPUTS / "second_m2.json",
    )
    doc = json.loads(out)
    assert code == 0 and doc["manipulator"] == "M1" and doc["decision"] == "Accept"


def test_simulate_writes_csv(capsys, tmp_path):
    out_csv = tmp_path / "t.csv"
    code, out, _ = run(
        capsys, "simulate", "--game", INPUTS / "base.json", "--offer", INPUTS / "offer_m1.json",
        "--method", "replicator", "--horizon", "200", "--out", out_csv,
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["verdict"]["induced_play"] == {"decision": "Decline", "profile": ["T", "L"]}
    traj = Trajectory.from_csv(out_csv.read_text())
    assert traj.row_actions == ("A T", "A B", "D T", "D B")


def test_gm_seed_overrides(capsys, tmp_path, monkeypatch):
    args = ["simulate", "--game", INPUTS / "base.json", "--mode", "sampled", "--steps", "300"]
    monkeypatch.setenv("GM_SEED", "42")
    run(capsys, *args, "--seed", "1", "--out", tmp_path / "a.csv")
    monkeypatch.delenv("GM_SEED")
    run(capsys, *args, "--seed", "42", "--out", tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    monkeypatch.setenv("GM_SEED", "nope")
    code, _, err = run(capsys, *args)
    assert code == 1 and "GM_SEED" in err


def test_sweep(capsys, tmp_path):
    sweep = tmp_path / "sweep.json"
    sweep.write_text(json.dumps([{"steps": 200}, {"method": "replicator", "horizon": 10}]))
    code, out, _ = run(
        capsys, "simulate", "--game", INPUTS / "base.json", "--sweep", sweep, "--out", tmp_path / "s.csv"
    )
    assert code == 0
    assert [r["method"] for r in json.loads(out)] == ["mwua-expected", "replicator"]
    assert (tmp_path / "s-0.csv").exists() and (tmp_path / "s-1.csv").exists()


@pytest.mark.parametrize(
    "argv",
    [
        ["analyze", "--game", "/nonexistent.json"],
        ["bogus"],
        ["simulate", "--game", str(INPUTS / "base.json"), "--eta", "0.9"],
        ["scenario", "--id", "9"],
    ],
)
def test_input_errors_exit_one(capsys, argv):
    try:
        code = main(argv)
    except SystemExit as exc:  # argparse usage errors
        code = exc.code
    _, err = capsys.readouterr()
    assert code == 1 and err.strip()


def test_bad_game_file_exits_one(capsys, tmp_path):
    bad = tmp_path / "g.json"
    bad.write_text(json.dumps({"row_actions": ["T"], "col_actions": ["L"], "row_payoffs": [[1, 2]], "col_payoffs": [[1]]}))
    code, _, err = run(capsys, "analyze", "--game", bad)
    assert code == 1 and "dimension mismatch" in err
    assert len(err.strip().splitlines()) == 1


def test_unsupported_structure_exits_two(capsys, tmp_path):
    coord = tmp_path / "c.json"
    coord.write_text(
        json.dumps({"row_actions": ["T", "B"], "col_actions": ["L", "R"], "row_payoffs": [[1, 0], [0, 1]], "col_payoffs": [[1, 0], [0, 1]]})
    )
    code, _, err = run(capsys, "spe", "--game", coord, "--offer", INPUTS / "offer_m1.json")
    assert code == 2 and "Nash" in err


@pytest.mark.slow
def test_scenario_two_disagrees(capsys, tmp_path):
    out_csv = tmp_path / "traj.csv"
    code, out, _ = run(capsys, "scenario", "--id", "2", "--method", "replicator", "--out", out_csv)
    doc = json.loads(out)
    assert code == 0 and doc["spe_vs_dynamics"] == "disagree"
    assert out_csv.read_text().startswith("t,Row:A T,")


def test_identical_config_identical_bytes(capsys, tmp_path):
    args = ["scenario", "--id", "3", "--steps", "2000", "--horizon", "20", "--mode", "sampled", "--seed", "5"]
    outs = []
    for k in range(2):
        run(capsys, *args, "--out", tmp_path / f"{k}.csv", "--report", tmp_path / f"{k}.json")
        outs.append(((tmp_path / f"{k}.csv").read_bytes(), (tmp_path / f"{k}.json").read_bytes()))
    assert outs[0] == outs[1]
