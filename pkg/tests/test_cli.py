import json
from pathlib import Path

import pytest

from rtsplan.cli import main
from rtsplan.suite import load_suite

FIXTURES = Path(__file__).parent / "fixtures"
TABLE = str(FIXTURES / "risk_suite.json")
P_FIXED = str(FIXTURES / "fixed_p.json")


def run(capsys, *args):
    code = main(list(args))
    out, err = capsys.readouterr()
    return code, out, err


# -- validate ---------------------------------------------------------------

def test_validate_default_tree(capsys):
    code, out, _ = run(capsys, "validate", "--tree", "default")
    assert code == 0 and "valid" in out


def test_validate_broken_tree_names_branch(capsys):
    code, _, err = run(capsys, "validate", "--tree", str(FIXTURES / "broken_tree.json"))
    assert code == 2 and "missing branch 'L'" in err


def test_validate_duplicate_ids(capsys):
    code, _, err = run(capsys, "validate", "--suite", str(FIXTURES / "dup_suite.json"))
    assert code == 2 and "duplicate id" in err


def test_validate_needs_one_target(capsys):
    assert run(capsys, "validate")[0] == 2


def test_unreadable_file(capsys, tmp_path):
    code, _, err = run(capsys, "validate", "--suite", str(tmp_path / "absent.json"))
    assert code == 3 and "cannot read" in err


def test_malformed_json(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "validate", "--suite", str(bad))[0] == 2


def test_unknown_key_strict_and_lenient(capsys, tmp_path):
    doc = json.loads(Path(TABLE).read_text())
    doc["tests"][0]["colour"] = "red"
    path = tmp_path / "s.json"
    path.write_text(json.dumps(doc))
    assert run(capsys, "validate", "--suite", str(path))[0] == 2
    assert run(capsys, "validate", "--suite", str(path), "--lenient")[0] == 0


# -- classify ---------------------------------------------------------------

def test_classify_explain(capsys):
    code, out, _ = run(capsys, "classify", "--suite", str(FIXTURES / "registration_suite.json"),
                       "--explain")
    assert code == 0
    assert out.splitlines()[0] == "customer-registration: Automate; 1:L → 2:M → 3:H → 7:H"
    assert "Q4" not in out


def test_classify_missing_answer(capsys):
    code, out, _ = run(capsys, "classify", "--suite",
                       str(FIXTURES / "missing_answer_suite.json"))
    assert code == 1
    assert "missing answer: Q7" in out
    assert "Automate" in out


def test_classify_without_active_tests(capsys):
    code, out, _ = run(capsys, "classify", "--suite", str(FIXTURES / "all_obsolete_suite.json"))
    assert code == 0
    assert len(out.strip().splitlines()) == 2  # header and rule only


def test_classify_json(capsys):
    code, out, _ = run(capsys, "classify", "--suite", str(FIXTURES / "registration_suite.json"),
                       "--format", "json")
    assert code == 0
    assert "customer-registration" in out and json.loads(out)


# -- score ------------------------------------------------------------------

def test_score_table(capsys):
    code, out, _ = run(capsys, "score", "--suite", TABLE, "--probabilities", P_FIXED)
    assert code == 0
    body = [line.split() for line in out.splitlines()[2:]]
    assert [(r[0], r[-1]) for r in body] == [("1020", "16"), ("1000", "10"), ("1010", "10"),
                                             ("1030", "0")]


def test_score_csv_with_selection(capsys):
    code, out, _ = run(capsys, "score", "--suite", TABLE, "--probabilities", P_FIXED,
                       "--format", "csv", "--fraction", "0.7")
    lines = out.splitlines()
    assert lines[0] == "id,C,N,S,NS,P,RE,selected"
    assert [line.rsplit(",", 1)[1] for line in lines[1:]] == ["yes", "yes", "yes", "no"]


def test_score_bad_fraction_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["score", "--suite", TABLE, "--fraction", "1.5"])
    assert exc.value.code == 2


def test_score_bad_probabilities(capsys, tmp_path):
    path = tmp_path / "p.json"
    path.write_text(json.dumps({"1030": 3}))
    assert run(capsys, "score", "--suite", TABLE, "--probabilities", str(path))[0] == 2


# -- plan -------------------------------------------------------------------

def test_plan_pt_summary_and_file(capsys, tmp_path):
    out_file = tmp_path / "plan.json"
    code, out, _ = run(capsys, "plan", "--suite", TABLE, "--out", str(out_file))
    assert code == 0
    assert out.startswith("pt: automate=1")
    doc = json.loads(out_file.read_text())
    assert doc["summary"]["automate"] == 1
    assert {e["id"] for e in doc["entries"]} == {"1000", "1010", "1020", "1030"}


def test_plan_retest_all(capsys):
    code, out, _ = run(capsys, "plan", "--suite", TABLE, "--policy", "retest-all",
                       "--format", "json")
    assert code == 0
    assert json.loads(out)["summary"]["run-manual"] == 4


def test_plan_tsra_fixed_probabilities(capsys):
    code, out, _ = run(capsys, "plan", "--suite", TABLE, "--policy", "tsra",
                       "--probabilities", P_FIXED, "--format", "json")
    entries = json.loads(out)["entries"]
    assert [e["id"] for e in entries if e["disposition"] == "select-manual"] == [
        "1020", "1000", "1010"]


def test_plan_missing_answer_is_domain_failure(capsys):
    code = run(capsys, "plan", "--suite", str(FIXTURES / "missing_answer_suite.json"))[0]
    assert code == 1


def test_plan_reruns_identical(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert run(capsys, "plan", "--suite", TABLE, "--quiet", "--out", str(path))[0] == 0
    assert a.read_bytes() == b.read_bytes()


# -- simulate ---------------------------------------------------------------

def test_simulate_reference_single_policy(capsys):
    code, out, _ = run(capsys, "simulate", "--scenario", "reference", "--policies",
                       "retest-all", "--format", "csv")
    assert code == 0
    assert {line.split(",")[0] for line in out.splitlines()[1:]} == {"retest-all"}


def test_simulate_unknown_policy(capsys):
    assert run(capsys, "simulate", "--scenario", "reference", "--policies", "fast")[0] == 2


def test_simulate_missing_scenario(capsys, tmp_path):
    assert run(capsys, "simulate", "--scenario", str(tmp_path / "none.json"))[0] == 3


def test_generate_then_simulate(capsys, tmp_path):
    path = tmp_path / "scn.json"
    assert run(capsys, "generate-scenario", "--tests", "15", "--seed", "4",
               "--out", str(path))[0] == 0
    first = run(capsys, "simulate", "--scenario", str(path), "--format", "json")
    second = run(capsys, "simulate", "--scenario", str(path), "--format", "json")
    assert first[0] == 0 and first[1] == second[1]
    assert json.loads(first[1])["seed"] == 4


# -- ingest -----------------------------------------------------------------

def test_ingest_writes_new_file(capsys, tmp_path):
    records = tmp_path / "records.json"
    records.write_text(json.dumps([{"test": "1030", "id": "D-9", "severity": 4}]))
    before = Path(TABLE).read_bytes()
    out_file = tmp_path / "suite.json"
    code = run(capsys, "ingest", "--suite", TABLE, "--version", "v2", "--records",
               str(records), "--out", str(out_file))[0]
    assert code == 0
    assert Path(TABLE).read_bytes() == before
    updated = load_suite(out_file.read_text())
    assert [d.defect_id for d in updated["1030"].defects] == ["D-9"]
    assert list(tmp_path.glob(".suite.json.*")) == []


def test_ingest_rejects_bad_records(capsys, tmp_path):
    records = tmp_path / "records.json"
    records.write_text(json.dumps([{"test": "1030"}]))
    assert run(capsys, "ingest", "--suite", TABLE, "--version", "v2",
               "--records", str(records))[0] == 2
    records.write_text(json.dumps([{"test": "nope", "id": "D", "severity": 2}]))
    assert run(capsys, "ingest", "--suite", TABLE, "--version", "v2",
               "--records", str(records))[0] == 2
