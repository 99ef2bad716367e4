import json
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from rtsplan.simulation import (Fault, Scenario, ScenarioParams, VersionSpec, compare,
                                dump_scenario, generate_scenario, reference_scenario,
                                run_campaign, scenario_from_dict)
from rtsplan.suite import DefectRecord, TestCase, TestSuite, TimingProfile
from rtsplan.tree import parse_tree

from helpers import random_suite, random_tree

Q1_TREE = parse_tree(json.dumps({"label": "q1", "root": {"question": 1, "branches": {
    "H": {"decision": "automate"}, "M": {"decision": "manual"}, "L": {"decision": "manual"}}}}))


def _hand_scenario():
    suite = TestSuite("hand", (
        TestCase("a", 5, answers={1: "H"}, timing=TimingProfile(30, 4, 100)),
        TestCase("b", 3, answers={1: "M"}, timing=TimingProfile(20, 2, 50),
                 defects=(DefectRecord("old", 4, "v0"),)),
        TestCase("c", 2, answers={1: "L"}, timing=TimingProfile(10, 2, 40)),
    ))
    versions = (VersionSpec("v1", (Fault("F1", 3, {"c"}),)), VersionSpec("v2"))
    params = ScenarioParams(tree=Q1_TREE, fraction=Fraction(1, 2), lanes=2,
                            risk_overhead_minutes_per_test=1)
    return Scenario(suite, versions, params)


def _row(m):
    return (m.exec_minutes, m.deploy_minutes, m.faults_detected, m.faults_missed,
            m.inclusiveness, m.precision)


# Expected values worked out by hand from the model's definitions.
HAND = {
    "retest-all": [(60, 0, 1, 0, 1, 0), (60, 0, 0, 0, 1, 0)],
    "tsra": [(50, 3, 0, 1, 0, 0), (50, 3, 0, 0, 1, Fraction(1, 3))],
    "atvm": [(32, 100, 1, 0, 1, 0), (32, 0, 0, 0, 1, 0)],
    "pt": [(22, 102, 0, 1, 0, 0), (22, 2, 0, 0, 1, Fraction(1, 3))],
}


@pytest.mark.parametrize("policy", list(HAND))
def test_hand_computed_campaign(policy):
    result = run_campaign(_hand_scenario(), policy)
    assert [_row(v) for v in result.versions] == HAND[policy]


def test_detected_faults_feed_next_version():
    result = run_campaign(_hand_scenario(), "atvm")
    assert result.plans[0].entries["c"].risk is None
    tsra = run_campaign(_hand_scenario(), "tsra")
    # TSRA skipped c in v1, so its history never grows
    assert tsra.plans[1].entries["c"].risk.stats.n == 0
    scenario = _hand_scenario()
    retest_then_tsra = run_campaign(
        Scenario(scenario.suite, scenario.versions + (VersionSpec("v3"),), scenario.params), "tsra")
    assert retest_then_tsra.plans[2].entries["b"].risk.p == 5


def test_history_accumulates_from_detected_faults():
    suite = TestSuite("h", tuple(TestCase(t, 3, timing=TimingProfile(10, 1, 1)) for t in "xyz"))
    versions = (VersionSpec("v1", (Fault("F1", 5, {"z"}),)), VersionSpec("v2"))
    result = run_campaign(Scenario(suite, versions, ScenarioParams(fraction=1)), "tsra")
    assert result.plans[0].entries["z"].risk.re == 0
    v2 = result.plans[1].entries["z"].risk
    assert (v2.stats.n, v2.p, v2.re) == (1, 5, 15)
    assert list(result.plans[1].entries)[0] == "z"


def test_deploy_share():
    result = run_campaign(_hand_scenario(), "pt")
    assert result.versions[0].deploy_share == Fraction(102, 124)
    assert run_campaign(_hand_scenario(), "retest-all").versions[0].deploy_share == 0


def test_aggregates():
    result = run_campaign(_hand_scenario(), "pt")
    assert result.total.exec_minutes == 44
    assert result.mean.deploy_minutes == 52
    assert result.total.faults_missed == 1
    assert result.mean.precision == Fraction(1, 6)


def test_scenario_rejects_unknown_detector():
    scenario = _hand_scenario()
    with pytest.raises(ValueError, match="unknown or obsolete"):
        Scenario(scenario.suite, (VersionSpec("v1", (Fault("F", 2, {"zz"}),)),), scenario.params)


def test_invalid_params():
    with pytest.raises(ValueError):
        ScenarioParams(lanes=0)
    with pytest.raises(ValueError):
        ScenarioParams(fraction=2)
    with pytest.raises(ValueError):
        VersionSpec("v", (Fault("F", 2, {"a"}), Fault("F", 3, {"a"})))
    with pytest.raises(ValueError):
        Fault("F", 2, set())


def test_unknown_policy():
    with pytest.raises(ValueError):
        run_campaign(_hand_scenario(), "random")


# -- properties over generated scenarios -----------------------------------

@given(st.integers(0, 10_000), st.integers(1, 40), st.integers(0, 4), st.floats(0, 0.4))
@settings(max_examples=60, deadline=None)
def test_campaign_invariants(seed, n_tests, n_versions, rate):
    scenario = generate_scenario(n_tests, n_versions, rate, seed,
                                 risk_overhead_minutes_per_test=3)
    report = compare(scenario)
    n_active = len(scenario.suite)
    for campaign in report.campaigns:
        for spec, m in zip(scenario.versions, campaign.versions):
            assert m.faults_detected + m.faults_missed == len(spec.faults)
            assert 0 <= m.inclusiveness <= 1 and 0 <= m.precision <= 1
            assert 0 <= m.deploy_share <= 1
            if not spec.faults:
                assert m.faults_detected == m.faults_missed == 0
    for policy in ("retest-all", "atvm"):
        assert all(m.faults_missed == 0 and m.inclusiveness == 1
                   for m in report[policy].versions)
    assert report["tsra"].total.deploy_minutes == 3 * n_active * n_versions
    assert report["retest-all"].total.deploy_minutes == 0
    for v_pt, v_atvm in zip(report["pt"].versions, report["atvm"].versions):
        assert v_pt.exec_minutes <= v_atvm.exec_minutes


@given(st.integers(0, 10_000))
@settings(max_examples=40, deadline=None)
def test_pt_never_slower_than_atvm_on_random_trees(seed):
    rng = random.Random(seed)
    suite = random_suite(rng, rng.randint(1, 25))
    faults = tuple(Fault(f"F{k}", 3, {rng.choice(suite.ids)}) for k in range(rng.randint(0, 5)))
    scenario = Scenario(suite, (VersionSpec("v1", faults), VersionSpec("v2")),
                        ScenarioParams(tree=random_tree(rng), lanes=rng.randint(1, 6)))
    pt, atvm = run_campaign(scenario, "pt"), run_campaign(scenario, "atvm")
    assert pt.total.exec_minutes <= atvm.total.exec_minutes


# -- generation and files ---------------------------------------------------

def test_generation_is_deterministic():
    a = generate_scenario(30, 3, 0.2, seed=11)
    b = generate_scenario(30, 3, 0.2, seed=11)
    assert a == b
    assert dump_scenario(a) == dump_scenario(b)
    assert generate_scenario(30, 3, 0.2, seed=12) != a


def test_generation_ranges_and_zero_rate():
    scenario = generate_scenario(200, 2, 0, seed=3)
    assert all(not v.faults for v in scenario.versions)
    for t in scenario.suite.tests:
        assert 1 <= t.cost <= 5
        assert sorted(t.answers) == list(range(1, 10))
        assert 10 <= t.timing.manual_minutes <= 60
        assert 1 <= t.timing.automated_minutes <= 6
        assert 30 <= t.timing.automation_deploy_minutes <= 240


def test_generation_at_training_scale():
    scenario = generate_scenario(500, 1, 0.05, seed=1)
    assert len(scenario.suite) == 500
    assert compare(scenario, ["pt"])["pt"].versions[0].exec_minutes > 0


@pytest.mark.parametrize("kwargs", [
    {"n_tests": 0}, {"n_tests": 5, "fault_rate": 1.5},
    {"n_tests": 5, "distributions": {"manual_minutes": (20, 10)}},
    {"n_tests": 5, "distributions": {"colour": (1, 2)}},
])
def test_generation_rejects_bad_params(kwargs):
    with pytest.raises(ValueError):
        generate_scenario(**kwargs)


def test_scenario_file_round_trip(tmp_path):
    scenario = generate_scenario(12, 2, 0.3, seed=5)
    again = scenario_from_dict(json.loads(dump_scenario(scenario)))
    assert again == scenario
    assert compare(again).to_csv() == compare(scenario).to_csv()


def test_scenario_file_with_references(tmp_path):
    scenario = _hand_scenario()
    doc = json.loads(dump_scenario(scenario))
    (tmp_path / "suite.json").write_text(json.dumps(doc["suite"]))
    (tmp_path / "tree.json").write_text(json.dumps(doc["params"]["tree"]))
    doc["suite"], doc["params"]["tree"] = "suite.json", "tree.json"
    loaded = scenario_from_dict(doc, tmp_path)
    assert loaded == scenario


def test_reference_scenario_shape():
    scenario = reference_scenario()
    assert len(scenario.suite) == 20
    assert len(scenario.versions) == 3
    assert scenario.versions[2].faults == ()


def test_report_renderings_agree():
    report = compare(_hand_scenario())
    rows = report.to_csv().splitlines()
    assert rows[0] == ",".join(report.COLUMNS)
    assert rows[1] == "retest-all,v1,60,0,1,0,1,0,0"
    assert "pt,mean,22,52,0,0.5,0.5,0.166667,0.702703" in rows
    doc = json.loads(report.to_json())
    pt = doc["policies"][3]
    assert pt["mean"]["deploy_minutes"] == 52 and pt["total"]["exec_minutes"] == 44
    assert "0.702703" in report.to_table()


def test_compare_subset_and_empty():
    report = compare(_hand_scenario(), ["retest-all"])
    assert [c.policy.value for c in report.campaigns] == ["retest-all"]
    with pytest.raises(ValueError):
        compare(_hand_scenario(), [])
