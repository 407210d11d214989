import json
import os
from pathlib import Path

import pytest

from toroprep.cli import (
    form_json,
    form_load,
    load_scenario,
    main,
    parse_scenario,
    render_case_table,
    ScenarioError,
)

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"

ONE_POINT = {"upstairs": 1, "downstairs": 1, "rows": [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
             "factors": ["trivial", "trivial", "trivial"], "divisor_up": ["x"], "divisor_down": ["u"]}


def write(tmp_path, doc, name="s.json"):
    p = tmp_path / name
    p.write_text(doc if isinstance(doc, str) else json.dumps(doc), encoding="utf-8")
    return str(p)


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_minimal_classify(tmp_path, capsys):
    p = write(tmp_path, {"version": 1, "algorithm": "classify", "fiber": [ONE_POINT]})
    assert len(load_scenario(p).fiber) == 1
    code, out, _ = run(["classify", "--scenario", p], capsys)
    assert code == 0
    res = json.loads(out)["results"][0]
    assert res["pair_case"] == 5 and res["morphism_case"] == 6


def test_negative_exponent_names_the_row(tmp_path, capsys):
    bad = dict(ONE_POINT, rows=[[1, 0, 0], [0, -1, 0], [0, 0, 1]])
    p = write(tmp_path, {"version": 1, "algorithm": "classify", "fiber": [bad]})
    code, out, err = run(["classify", "--scenario", p], capsys)
    assert code == 3 and out == ""
    assert "fiber[0]" in err and "row v" in err


def test_parse_error(tmp_path, capsys):
    p = write(tmp_path, "{not json")
    assert run(["classify", "--scenario", p], capsys)[0] == 2
    assert run(["classify", "--scenario", str(tmp_path / "missing.json")], capsys)[0] == 2


@pytest.mark.parametrize("doc,path", [
    ({"version": 2, "algorithm": "classify"}, "version"),
    ({"version": 1, "algorithm": "solve"}, "algorithm"),
    ({"version": 1, "algorithm": "classify", "fiber": [dict(ONE_POINT, divisor_up=["q"])]}, "fiber[0].divisor_up"),
    ({"version": 1, "algorithm": "classify", "fiber": [dict(ONE_POINT, factors=["trivial", "weird", "trivial"])]},
     "fiber[0].factors[1]"),
    ({"version": 1, "algorithm": "classify", "fiber": [ONE_POINT], "options": {"budget": -1}}, "options.budget"),
])
def test_validation_field_paths(doc, path):
    with pytest.raises(ScenarioError) as exc:
        parse_scenario(doc)
    assert exc.value.code == 3
    assert str(exc.value).startswith(path)


def test_lemma_a_isolated_point_branch_tree(capsys):
    code, out, _ = run(["lemma-a", "--scenario", str(SCENARIOS / "lemma_a_isolated.json")], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["outcome"] == "all_toroidal"
    first = [s for s in doc["steps"] if s["stage"] == "i"]
    assert {s["chart"]["name"] for s in first} == {"point.x", "point.y", "point.z"}


def test_valuation_five_three(capsys):
    code, out, _ = run(["valuation", "--scenario", str(SCENARIOS / "valuation_5_3.json")], capsys)
    assert code == 0
    assert len(json.loads(out)["steps"]) == 4


def test_lemma_b_rounds(capsys):
    code, out, _ = run(["lemma-b", "--scenario", str(SCENARIOS / "lemma_b_curve.json")], capsys)
    doc = json.loads(out)
    assert code == 0
    omega = [r for s in doc["steps"] for r in s["invariants"] if r["role"] == "center" and r["root"] == 3]
    assert omega and max(r["depth"] for r in omega) + 1 <= 3


def test_corrupted_verify(capsys):
    code, out, err = run(["verify", "--scenario", str(SCENARIOS / "verify_corrupted.json")], capsys)
    assert code == 5
    assert "coords" in err
    assert json.loads(out)["verification"]["mismatches"]


def test_clean_verify(capsys):
    code, out, _ = run(["verify", "--scenario", str(SCENARIOS / "verify_lemma_b.json"), "--samples", "20"], capsys)
    assert code == 0
    assert json.loads(out)["verification"]["samples"] == 20


def test_exhausted_budget(capsys):
    code, out, _ = run(["lemma-b", "--scenario", str(SCENARIOS / "lemma_b_curve.json"), "--budget", "1"], capsys)
    assert code == 4
    assert json.loads(out)["outcome"] == "exhausted"


def test_command_must_match_algorithm(capsys):
    assert run(["lemma-a", "--scenario", str(SCENARIOS / "valuation_5_3.json")], capsys)[0] == 3


def test_out_file_and_determinism(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    sc = str(SCENARIOS / "lemma_a_fiber.json")
    assert run(["verify", "--scenario", sc, "--out", str(a), "--seed", "5", "--samples", "10"], capsys)[0] == 0
    assert run(["verify", "--scenario", sc, "--out", str(b), "--seed", "5", "--samples", "10"], capsys)[0] == 0
    assert a.read_bytes() == b.read_bytes()
    assert not [f for f in os.listdir(tmp_path) if f.endswith(".tmp")]


def test_no_output_file_on_failure(tmp_path, capsys):
    out = tmp_path / "trace.json"
    p = write(tmp_path, "{")
    assert run(["lemma-a", "--scenario", p, "--out", str(out)], capsys)[0] == 2
    assert not out.exists()


def test_case_table_markdown(tmp_path, capsys):
    code, out, _ = run(["case-table", "A"], capsys)
    assert code == 0
    assert out == render_case_table("A")
    lines = out.splitlines()
    assert lines[0].startswith("| pattern") and len(lines) == 2 + 23
    assert "3-point maps to 3-point" in out
    assert render_case_table("B") == render_case_table("B")


def test_form_round_trip():
    for name in ("lemma_a_fiber.json", "classify_one_point.json", "lemma_b_curve.json"):
        raw = json.loads((SCENARIOS / name).read_text(encoding="utf-8"))
        for i, d in enumerate(raw["fiber"]):
            f = form_load(d, f"fiber[{i}]")
            assert form_load(form_json(f), "x") == f
        sc = parse_scenario(raw)
        assert parse_scenario(sc.as_json()).fiber == sc.fiber
