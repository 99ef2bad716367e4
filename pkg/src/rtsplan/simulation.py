"""Multi-version regression campaign simulation.

Each version seeds a set of faults, every fault naming the tests able to
reveal it. A policy's plan decides which tests run; a fault counts as
detected when at least one of its revealing tests is executed. Detected
faults are fed back into the defect history before the next version is
planned, so risk scores evolve over the campaign.
"""
from __future__ import annotations

import csv
import io
import json
import os
from dataclasses import dataclass, field, replace
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any, Iterable

import numpy as np

from ._validation import (Number, check_choice, check_fraction, format_number, json_number,
                          to_fraction)
from .planner import FRACTION_BASES, Plan, Policy, make_plan
from .report import render_table
from .suite import (Answer, DefectRecord, QUESTION_IDS, TestCase, TestSuite, TimingProfile,
                    active_tests, ingest_defects, suite_from_dict, suite_to_dict)
from .tree import DecisionTree, default_tree, tree_from_dict, tree_to_dict, load_tree

DEFAULT_DISTRIBUTIONS = {
    "manual_minutes": (10, 60),
    "automated_minutes": (1, 6),
    "automation_deploy_minutes": (30, 240),
    "detectors": (1, 1),
}


@dataclass(frozen=True)
class Fault:
    fault_id: str
    severity: int
    detected_by: frozenset[str]

    def __post_init__(self):
        object.__setattr__(self, "detected_by", frozenset(self.detected_by))
        if not self.detected_by:
            raise ValueError(f"fault {self.fault_id!r} must name at least one detecting test")
        if isinstance(self.severity, bool) or not isinstance(self.severity, int) \
                or not 1 <= self.severity <= 5:
            raise ValueError(f"fault {self.fault_id!r}: severity must be an integer in 1..5")


@dataclass(frozen=True)
class VersionSpec:
    label: str
    faults: tuple[Fault, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "faults", tuple(self.faults))
        ids = [f.fault_id for f in self.faults]
        if len(ids) != len(set(ids)):
            raise ValueError(f"version {self.label!r}: fault ids must be unique")

    @property
    def revealing(self) -> frozenset[str]:
        return frozenset().union(*(f.detected_by for f in self.faults))


@dataclass(frozen=True)
class ScenarioParams:
    tree: DecisionTree = field(default_factory=default_tree)
    fraction: Fraction = Fraction(7, 10)
    fraction_basis: str = "pool"
    lanes: int = 4
    risk_overhead_minutes_per_test: Fraction = Fraction(0)
    exclude_zero_risk: bool = False
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "fraction", check_fraction(self.fraction))
        check_choice(self.fraction_basis, FRACTION_BASES, name="fraction_basis")
        if isinstance(self.lanes, bool) or not isinstance(self.lanes, int) or self.lanes < 1:
            raise ValueError("lanes must be an integer >= 1")
        overhead = to_fraction(self.risk_overhead_minutes_per_test,
                               name="risk_overhead_minutes_per_test")
        if overhead < 0:
            raise ValueError("risk_overhead_minutes_per_test must be >= 0")
        object.__setattr__(self, "risk_overhead_minutes_per_test", overhead)


@dataclass(frozen=True)
class Scenario:
    suite: TestSuite
    versions: tuple[VersionSpec, ...]
    params: ScenarioParams = field(default_factory=ScenarioParams)

    def __post_init__(self):
        object.__setattr__(self, "versions", tuple(self.versions))
        active = {t.id for t in active_tests(self.suite)}
        for v in self.versions:
            for f in v.faults:
                unknown = f.detected_by - active
                if unknown:
                    raise ValueError(f"version {v.label!r}, fault {f.fault_id!r}: detected_by "
                                     f"names unknown or obsolete tests {sorted(unknown)}")


@dataclass(frozen=True)
class VersionMetrics:
    label: str
    exec_minutes: Fraction
    deploy_minutes: Fraction
    faults_detected: Fraction
    faults_missed: Fraction
    inclusiveness: Fraction
    precision: Fraction
    executed: Fraction = Fraction(0)
    skipped: Fraction = Fraction(0)

    @property
    def deploy_share(self) -> Fraction:
        total = self.deploy_minutes + self.exec_minutes
        return self.deploy_minutes / total if total else Fraction(0)


@dataclass(frozen=True)
class CampaignMetrics:
    policy: Policy
    versions: tuple[VersionMetrics, ...]
    plans: tuple[Plan, ...] = ()

    def _aggregate(self, label: str, scale: Fraction) -> VersionMetrics:
        vs = self.versions
        if not vs:
            return VersionMetrics(label, *([Fraction(0)] * 4), Fraction(1), Fraction(1))

        def total(attr):
            return sum((getattr(v, attr) for v in vs), Fraction(0)) * scale

        n = len(vs)
        return VersionMetrics(
            label, total("exec_minutes"), total("deploy_minutes"), total("faults_detected"),
            total("faults_missed"),
            sum((v.inclusiveness for v in vs), Fraction(0)) / n,
            sum((v.precision for v in vs), Fraction(0)) / n,
            total("executed"), total("skipped"))

    @property
    def total(self) -> VersionMetrics:
        """Sums over versions (inclusiveness and precision are averaged)."""
        return self._aggregate("total", Fraction(1))

    @property
    def mean(self) -> VersionMetrics:
        return self._aggregate("mean", Fraction(1, max(len(self.versions), 1)))


def run_campaign(scenario: Scenario, policy: Policy | str) -> CampaignMetrics:
    """Simulate every version of ``scenario`` under ``policy``.

    Execution time is manual minutes for manually run tests plus automated
    minutes divided across ``lanes``. Deployment time charges each test's
    automation cost the first time it is automated, plus the risk-analysis
    overhead for every test scored in a version.
    """
    policy = Policy(policy)
    prm = scenario.params
    suite = scenario.suite
    already_automated: set[str] = set()
    results, plans = [], []

    for version in scenario.versions:
        plan = make_plan(policy, suite, prm.tree, fraction=prm.fraction,
                         fraction_basis=prm.fraction_basis,
                         exclude_zero_risk=prm.exclude_zero_risk)
        plans.append(plan)
        automated, manual = plan.automated, plan.manual
        executed = set(automated) | set(manual)
        timing = {t.id: t.timing for t in suite.tests}

        exec_minutes = (sum((timing[t].manual_minutes for t in manual), Fraction(0))
                        + sum((timing[t].automated_minutes for t in automated), Fraction(0))
                        / prm.lanes)
        fresh = [t for t in automated if t not in already_automated]
        already_automated.update(fresh)
        deploy_minutes = (sum((timing[t].automation_deploy_minutes for t in fresh), Fraction(0))
                          + prm.risk_overhead_minutes_per_test * len(plan.risk_scored))

        detected = [f for f in version.faults if f.detected_by & executed]
        revealing = version.revealing
        quiet = set(plan.entries) - revealing
        inclusiveness = (Fraction(len(revealing & executed), len(revealing))
                         if revealing else Fraction(1))
        precision = Fraction(len(quiet - executed), len(quiet)) if quiet else Fraction(1)

        results.append(VersionMetrics(
            version.label, exec_minutes, deploy_minutes,
            Fraction(len(detected)), Fraction(len(version.faults) - len(detected)),
            inclusiveness, precision, Fraction(len(executed)),
            Fraction(len(plan.entries) - len(executed))))

        records = [(tid, f.fault_id, f.severity)
                   for f in detected for tid in sorted(f.detected_by & executed)]
        suite = ingest_defects(suite, version.label, records)

    return CampaignMetrics(policy, tuple(results), tuple(plans))


@dataclass(frozen=True)
class ComparisonReport:
    campaigns: tuple[CampaignMetrics, ...]
    seed: int = 0

    COLUMNS = ("policy", "version", "exec_minutes", "deploy_minutes", "faults_detected",
               "faults_missed", "inclusiveness", "precision", "deploy_share")

    def __getitem__(self, policy: Policy | str) -> CampaignMetrics:
        policy = Policy(policy)
        for c in self.campaigns:
            if c.policy is policy:
                return c
        raise KeyError(policy.value)

    def rows(self) -> list[tuple[str, VersionMetrics]]:
        out = []
        for c in self.campaigns:
            out.extend((c.policy.value, v) for v in c.versions)
            out.append((c.policy.value, c.mean))
        return out

    def _cells(self, policy: str, v: VersionMetrics) -> list[str]:
        return [policy, v.label] + [format_number(x) for x in (
            v.exec_minutes, v.deploy_minutes, v.faults_detected, v.faults_missed,
            v.inclusiveness, v.precision, v.deploy_share)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.COLUMNS)
        for policy, v in self.rows():
            writer.writerow(self._cells(policy, v))
        return buf.getvalue()

    def to_dict(self) -> dict:
        def metrics(v: VersionMetrics) -> dict:
            return {"version": v.label,
                    "exec_minutes": json_number(v.exec_minutes),
                    "deploy_minutes": json_number(v.deploy_minutes),
                    "faults_detected": json_number(v.faults_detected),
                    "faults_missed": json_number(v.faults_missed),
                    "inclusiveness": json_number(v.inclusiveness),
                    "precision": json_number(v.precision),
                    "deploy_share": json_number(v.deploy_share)}
        return {"seed": self.seed,
                "policies": [{"policy": c.policy.value,
                              "versions": [metrics(v) for v in c.versions],
                              "mean": metrics(c.mean),
                              "total": metrics(c.total)} for c in self.campaigns]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def to_table(self) -> str:
        headers = ["policy", "version", "exec min", "deploy min", "detected", "missed",
                   "inclusive", "precision", "deploy share"]
        return render_table(headers, [self._cells(p, v) for p, v in self.rows()])


def compare(scenario: Scenario, policies: Iterable[Policy | str] | None = None) -> ComparisonReport:
    chosen = list(Policy) if policies is None else [Policy(p) for p in policies]
    if not chosen:
        raise ValueError("compare needs at least one policy")
    order = [p for p in Policy if p in chosen]
    return ComparisonReport(tuple(run_campaign(scenario, p) for p in order), scenario.params.seed)


# -- scenario files ---------------------------------------------------------

def _resolve(ref: str, base_dir: Path | None) -> Path:
    p = Path(ref)
    if not p.is_absolute() and base_dir is not None:
        p = base_dir / p
    return p


def scenario_from_dict(doc: Any, base_dir: str | os.PathLike | None = None, *,
                       strict: bool = True) -> Scenario:
    if not isinstance(doc, dict):
        raise ValueError("scenario document must be an object")
    base = Path(base_dir) if base_dir is not None else None
    unknown = set(doc) - {"suite", "versions", "params"}
    if strict and unknown:
        raise ValueError(f"scenario: unknown keys {sorted(unknown)}")

    raw_suite = doc.get("suite")
    if isinstance(raw_suite, str):
        raw_suite = json.loads(_resolve(raw_suite, base).read_text("utf-8"))
    suite = suite_from_dict(raw_suite, strict=strict)

    versions = []
    for i, v in enumerate(doc.get("versions", [])):
        faults = tuple(Fault(str(f["id"]), f["severity"], frozenset(f["detected_by"]))
                       for f in v.get("faults", []))
        versions.append(VersionSpec(str(v.get("label", f"v{i + 1}")), faults))

    raw = dict(doc.get("params", {}))
    tree_ref = raw.pop("tree", "default")
    if isinstance(tree_ref, dict):
        tree = tree_from_dict(tree_ref)
    elif tree_ref == "default":
        tree = default_tree()
    else:
        tree = load_tree(str(_resolve(tree_ref, base)))
    known = {"fraction", "fraction_basis", "lanes", "risk_overhead_minutes_per_test",
             "exclude_zero_risk", "seed"}
    if strict and set(raw) - known:
        raise ValueError(f"scenario params: unknown keys {sorted(set(raw) - known)}")
    params = ScenarioParams(tree=tree, **{k: v for k, v in raw.items() if k in known})
    return Scenario(suite, tuple(versions), params)


def load_scenario(path: str | os.PathLike) -> Scenario:
    """``"reference"`` or a path to a scenario file."""
    if str(path) == "reference":
        return reference_scenario()
    path = Path(path)
    return scenario_from_dict(json.loads(path.read_text("utf-8")), path.parent)


def scenario_to_dict(scenario: Scenario) -> dict:
    prm = scenario.params
    tree = "default" if prm.tree == default_tree() else tree_to_dict(prm.tree)
    return {
        "suite": suite_to_dict(scenario.suite),
        "versions": [{"label": v.label,
                      "faults": [{"id": f.fault_id, "severity": f.severity,
                                  "detected_by": sorted(f.detected_by)} for f in v.faults]}
                     for v in scenario.versions],
        "params": {"fraction": json_number(prm.fraction), "fraction_basis": prm.fraction_basis,
                   "lanes": prm.lanes,
                   "risk_overhead_minutes_per_test": json_number(prm.risk_overhead_minutes_per_test),
                   "exclude_zero_risk": prm.exclude_zero_risk,
                   "tree": tree, "seed": prm.seed},
    }


def dump_scenario(scenario: Scenario) -> str:
    return json.dumps(scenario_to_dict(scenario), indent=2) + "\n"


def reference_scenario() -> Scenario:
    text = resources.files("rtsplan").joinpath("data/reference_scenario.json").read_text("utf-8")
    return scenario_from_dict(json.loads(text))


# -- generation -------------------------------------------------------------

def generate_scenario(n_tests: int, n_versions: int = 3, fault_rate: Number = 0.1,
                      seed: int = 0, distributions: dict | None = None, *,
                      history_rate: Number = 0.5, tree: DecisionTree | None = None,
                      fraction: Number = Fraction(7, 10), fraction_basis: str = "pool",
                      lanes: int = 4, risk_overhead_minutes_per_test: Number = 2) -> Scenario:
    """Build a pseudo-random scenario, fully determined by ``seed``.

    Costs are uniform on 1..5 and every test answers all nine questions
    uniformly. Timings are whole minutes drawn uniformly from the ranges in
    ``distributions``. Each version seeds ``Binomial(n_tests, fault_rate)``
    faults, each revealed by uniformly chosen tests. Initial defect history
    is ``Poisson(history_rate)`` defects per test.
    """
    if isinstance(n_tests, bool) or not isinstance(n_tests, int) or n_tests < 1:
        raise ValueError("n_tests must be an integer >= 1")
    if isinstance(n_versions, bool) or not isinstance(n_versions, int) or n_versions < 0:
        raise ValueError("n_versions must be an integer >= 0")
    rate = check_fraction(fault_rate, name="fault_rate")
    hist = to_fraction(history_rate, name="history_rate")
    if hist < 0:
        raise ValueError("history_rate must be >= 0")
    dist = dict(DEFAULT_DISTRIBUTIONS)
    for key, value in (distributions or {}).items():
        if key not in DEFAULT_DISTRIBUTIONS:
            raise ValueError(f"unknown distribution {key!r}")
        lo, hi = value
        if lo > hi or lo < 0:
            raise ValueError(f"distribution {key!r} needs 0 <= low <= high, got {value!r}")
        dist[key] = (lo, hi)
    if dist["manual_minutes"][0] <= 0 or dist["automated_minutes"][0] <= 0:
        raise ValueError("manual and automated minutes must be drawn from positive ranges")
    det_lo, det_hi = dist["detectors"]
    if det_lo < 1 or det_hi > n_tests:
        raise ValueError("detectors range must lie within 1..n_tests")

    suite_ss, history_ss, fault_ss = np.random.SeedSequence(seed).spawn(3)
    rng = np.random.default_rng(suite_ss)
    hrng = np.random.default_rng(history_ss)
    frng = np.random.default_rng(fault_ss)
    letters = [a.value for a in Answer]
    width = len(str(n_tests))

    def draw(key):
        lo, hi = dist[key]
        return Fraction(int(rng.integers(lo, hi + 1)))

    tests = []
    for i in range(n_tests):
        tid = f"T{i + 1:0{width}d}"
        cost = int(rng.integers(1, 6))
        answers = {q: Answer(letters[int(rng.integers(0, 3))]) for q in QUESTION_IDS}
        timing = TimingProfile(draw("manual_minutes"), draw("automated_minutes"),
                               draw("automation_deploy_minutes"))
        n_hist = int(hrng.poisson(float(hist)))
        defects = tuple(DefectRecord(f"{tid}-H{k + 1}", int(hrng.integers(1, 6)), "v0")
                        for k in range(n_hist))
        tests.append(TestCase(id=tid, cost=cost, name=f"generated test {i + 1}",
                              answers=answers, timing=timing, defects=defects))
    suite = TestSuite(f"generated-{seed}", tuple(tests))

    ids = suite.ids
    versions = []
    for v in range(n_versions):
        n_faults = int(frng.binomial(n_tests, float(rate)))
        faults = []
        for k in range(n_faults):
            k_det = int(frng.integers(det_lo, det_hi + 1))
            chosen = frng.choice(n_tests, size=k_det, replace=False)
            faults.append(Fault(f"F{v + 1}.{k + 1}", int(frng.integers(1, 6)),
                                frozenset(ids[int(j)] for j in chosen)))
        versions.append(VersionSpec(f"v{v + 1}", tuple(faults)))

    params = ScenarioParams(tree=tree or default_tree(), fraction=to_fraction(fraction),
                            fraction_basis=fraction_basis, lanes=lanes,
                            risk_overhead_minutes_per_test=to_fraction(
                                risk_overhead_minutes_per_test),
                            seed=seed)
    return Scenario(suite, tuple(versions), params)


def with_seed(scenario: Scenario, seed: int) -> Scenario:
    return replace(scenario, params=replace(scenario.params, seed=seed))
