import json
from pathlib import Path

import pytest

from nullforcing.cli import main, parse_scenario
from nullforcing.errors import ValidationError

SCEN = Path(__file__).resolve().parent.parent / "scenarios"


def _run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def test_enumerate_stage_one(capsys):
    code, out = _run(capsys, "enumerate", "--n", "1", "--count", "2")
    assert code == 0
    rows = json.loads(out)["sets"]
    assert [r["addresses"] for r in rows] == [["0"], ["1"]]
    assert [r["measure"] for r in rows] == ["1/2", "1/2"]


def test_enumerate_text(capsys):
    code, out = _run(capsys, "enumerate", "--n", "2", "--count", "3", "--format", "text")
    assert code == 0 and len(out.strip().splitlines()) == 3


def test_check_clause_three(capsys):
    code, out = _run(capsys, "check", str(SCEN / "bad_condition.json"))
    assert code == 2
    rec = json.loads(out)
    assert rec["error"] == "invalid_condition"
    assert [(v["clause"], v["coord"]) for v in rec["violations"]] == [("3", "a")]


def test_check_scenario_ok(capsys):
    code, out = _run(capsys, "check", str(SCEN / "two_chains.json"))
    assert code == 0 and json.loads(out)["ok"]


def test_check_valid_condition(tmp_path, capsys):
    obj = json.loads((SCEN / "bad_condition.json").read_text())
    obj["condition"]["coords"][0]["w"] = 1
    f = tmp_path / "ok.json"
    f.write_text(json.dumps(obj))
    code, out = _run(capsys, "check", str(f))
    assert code == 0 and json.loads(out)["kind"] == "condition"


def test_simulate_byte_identical(tmp_path, capsys):
    outs = []
    for i in range(2):
        path = tmp_path / f"r{i}.json"
        code, _ = _run(capsys, "simulate", "--scenario", str(SCEN / "two_chains.json"), "--output", str(path))
        assert code == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    rep = json.loads(outs[0])
    assert rep["summary"]["all_pass"]
    for v in rep["verdicts"]:
        assert set(v) == {"claim", "anchor", "pass", "witness"}


def test_simulate_text(capsys):
    code, out = _run(capsys, "simulate", "--scenario", str(SCEN / "two_chains.json"), "--format", "text", "--depth", "4")
    assert code == 0
    assert out.strip().splitlines()[-1].endswith("verdicts pass")


def test_witness(capsys):
    code, out = _run(capsys, "witness", "--scenario", str(SCEN / "two_chains.json"), "--a", "a1", "--b", "b1", "--after", "3")
    assert code == 0
    rep = json.loads(out)
    assert rep["m"] > 3 and rep["recheck"]["pass"]


def test_witness_comparable_is_input_error(capsys):
    code, out = _run(capsys, "witness", "--scenario", str(SCEN / "two_chains.json"), "--a", "a0", "--b", "a1")
    assert code == 2 and json.loads(out)["error"] == "input_error"


@pytest.mark.parametrize(
    "content",
    [
        "not json",
        "[]",
        '{"poset": {"elements": ["a"], "order": [["a", "z"]]}}',
        '{"poset": {"elements": ["a"], "order": []}, "depth": 500}',
        '{"poset": {"elements": ["a"], "order": []}, "agenda": [{"op": "warp"}]}',
    ],
)
def test_malformed_input(tmp_path, capsys, content):
    f = tmp_path / "s.json"
    f.write_text(content)
    code, out = _run(capsys, "simulate", "--scenario", str(f))
    assert code == 2
    assert json.loads(out)["error"] == "input_error"


def test_missing_file_and_bad_args(tmp_path, capsys):
    code, out = _run(capsys, "check", str(tmp_path / "nope.json"))
    assert code == 2 and "cannot read" in json.loads(out)["message"]
    assert main(["enumerate", "--n", "x", "--count", "1"]) == 2


def test_stratum_cap():
    els = [f"e{i}" for i in range(13)]
    with pytest.raises(ValidationError):
        parse_scenario({"poset": {"elements": els, "order": []}})
