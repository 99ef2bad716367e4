"""Test plans for the four regression policies.

``retest-all`` runs everything manually; ``tsra`` runs the highest-risk
fraction; ``atvm`` automates what the viability tree accepts and runs the
rest manually; ``pt`` automates what the tree accepts and applies risk
selection only to the tests the tree rejects.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

from ._validation import Number, check_choice, check_fraction, json_number
from .risk import RiskRow, score_suite, select_quota
from .suite import TestSuite, active_tests
from .tree import Classification, Decision, DecisionTree, MissingAnswer, classify


class Policy(str, Enum):
    RETEST_ALL = "retest-all"
    TSRA = "tsra"
    ATVM = "atvm"
    PT = "pt"


class Disposition(str, Enum):
    AUTOMATE = "automate"
    SELECT_MANUAL = "select-manual"
    RUN_MANUAL = "run-manual"
    SKIP = "skip"


class Rationale(str, Enum):
    TREE_YES = "tree-yes"
    TREE_NO = "tree-no"
    TREE_NO_RISK_SELECTED = "tree-no+risk-selected"
    TREE_NO_RISK_SKIPPED = "tree-no+risk-skipped"
    POLICY_ALL = "policy-all"
    RISK_SELECTED = "risk-selected"
    RISK_SKIPPED = "risk-skipped"


_ALLOWED = {
    Disposition.AUTOMATE: {Rationale.TREE_YES},
    Disposition.SELECT_MANUAL: {Rationale.RISK_SELECTED, Rationale.TREE_NO_RISK_SELECTED},
    Disposition.RUN_MANUAL: {Rationale.POLICY_ALL, Rationale.TREE_NO},
    Disposition.SKIP: {Rationale.RISK_SKIPPED, Rationale.TREE_NO_RISK_SKIPPED},
}

FRACTION_BASES = ("pool", "total")


@dataclass(frozen=True)
class PlanEntry:
    test_id: str
    disposition: Disposition
    rationale: Rationale
    risk: RiskRow | None = None
    classification: Classification | None = None

    def __post_init__(self):
        if self.rationale not in _ALLOWED[self.disposition]:
            raise ValueError(f"rationale {self.rationale.value!r} is inconsistent with "
                             f"disposition {self.disposition.value!r}")

    @property
    def executed(self) -> bool:
        return self.disposition is not Disposition.SKIP


@dataclass(frozen=True)
class Plan:
    policy: Policy
    entries: dict[str, PlanEntry]
    parameters: dict = field(default_factory=dict)

    def ids(self, *dispositions: Disposition) -> list[str]:
        return [tid for tid, e in self.entries.items() if e.disposition in dispositions]

    @property
    def automated(self) -> list[str]:
        return self.ids(Disposition.AUTOMATE)

    @property
    def manual(self) -> list[str]:
        return self.ids(Disposition.SELECT_MANUAL, Disposition.RUN_MANUAL)

    @property
    def skipped(self) -> list[str]:
        return self.ids(Disposition.SKIP)

    @property
    def risk_scored(self) -> list[str]:
        return [tid for tid, e in self.entries.items() if e.risk is not None]

    def counts(self) -> dict[str, int]:
        out = {d.value: 0 for d in Disposition}
        for e in self.entries.values():
            out[e.disposition.value] += 1
        return out


class PlanningError(ValueError):
    """One or more tests could not be routed through the tree."""

    def __init__(self, missing: list[MissingAnswer]):
        self.missing = missing
        super().__init__("; ".join(str(m) for m in missing))


def _classify_all(tree: DecisionTree, suite: TestSuite) -> dict[str, Classification]:
    out, missing = {}, []
    for t in active_tests(suite):
        try:
            out[t.id] = classify(tree, t.answers)
        except MissingAnswer as exc:
            missing.append(MissingAnswer(exc.question, t.id))
    if missing:
        raise PlanningError(missing)
    return out


def plan_retest_all(suite: TestSuite) -> Plan:
    entries = {t.id: PlanEntry(t.id, Disposition.RUN_MANUAL, Rationale.POLICY_ALL)
               for t in active_tests(suite)}
    return Plan(Policy.RETEST_ALL, entries, {})


def plan_tsra(suite: TestSuite, fraction: Number = Fraction(7, 10), *,
              exclude_zero_risk: bool = False, probabilities=None) -> Plan:
    """Run the top ``ceil(fraction * n)`` active tests by risk exposure.

    ``probabilities`` optionally fixes P per test id (see ``score_suite``).
    """
    f = check_fraction(fraction)
    rows = score_suite(suite, probabilities=probabilities)
    quota = math.ceil(f * len(rows))
    selected, excluded = select_quota(rows, quota, exclude_zero_risk)
    by_id = {r.test_id: r for r in rows}
    entries = {}
    for tid in selected:
        entries[tid] = PlanEntry(tid, Disposition.SELECT_MANUAL, Rationale.RISK_SELECTED, by_id[tid])
    for tid in excluded:
        entries[tid] = PlanEntry(tid, Disposition.SKIP, Rationale.RISK_SKIPPED, by_id[tid])
    params = {"fraction": f, "fraction_basis": "total", "exclude_zero_risk": exclude_zero_risk,
              "quota": quota}
    return Plan(Policy.TSRA, entries, params)


def plan_atvm(suite: TestSuite, tree: DecisionTree) -> Plan:
    classes = _classify_all(tree, suite)
    entries = {}
    for tid, c in classes.items():
        if c.decision is Decision.AUTOMATE:
            entries[tid] = PlanEntry(tid, Disposition.AUTOMATE, Rationale.TREE_YES, classification=c)
        else:
            entries[tid] = PlanEntry(tid, Disposition.RUN_MANUAL, Rationale.TREE_NO, classification=c)
    return Plan(Policy.ATVM, entries, {"tree": tree.label})


def plan_pt(suite: TestSuite, tree: DecisionTree, fraction: Number = Fraction(7, 10),
            fraction_basis: str = "pool", *, exclude_zero_risk: bool = False,
            bin_over_suite: bool = False) -> Plan:
    """Hybrid plan: the tree decides automation, risk selection handles the rest.

    Every test is classified first, then the tree-manual pool is scored and
    the top ``ceil(fraction * basis)`` of it kept, where ``basis`` is the pool
    size or, with ``fraction_basis="total"``, the number of active tests
    (capped at the pool size).
    """
    f = check_fraction(fraction)
    check_choice(fraction_basis, FRACTION_BASES, name="fraction_basis")
    classes = _classify_all(tree, suite)
    automate = [tid for tid, c in classes.items() if c.decision is Decision.AUTOMATE]
    pool = [tid for tid, c in classes.items() if c.decision is Decision.MANUAL]

    rows = score_suite(suite, pool, bin_over_suite=bin_over_suite) if pool else []
    basis = len(pool) if fraction_basis == "pool" else len(classes)
    quota = min(len(pool), math.ceil(f * basis))
    selected, excluded = select_quota(rows, quota, exclude_zero_risk)
    by_id = {r.test_id: r for r in rows}

    entries = {}
    for tid in automate:
        entries[tid] = PlanEntry(tid, Disposition.AUTOMATE, Rationale.TREE_YES,
                                 classification=classes[tid])
    for tid in selected:
        entries[tid] = PlanEntry(tid, Disposition.SELECT_MANUAL, Rationale.TREE_NO_RISK_SELECTED,
                                 by_id[tid], classes[tid])
    for tid in excluded:
        entries[tid] = PlanEntry(tid, Disposition.SKIP, Rationale.TREE_NO_RISK_SKIPPED,
                                 by_id[tid], classes[tid])
    params = {"fraction": f, "fraction_basis": fraction_basis,
              "exclude_zero_risk": exclude_zero_risk,
              "bin_population": "suite" if bin_over_suite else "pool",
              "quota": quota, "tree": tree.label}
    return Plan(Policy.PT, entries, params)


def make_plan(policy: Policy | str, suite: TestSuite, tree: DecisionTree | None = None, *,
              fraction: Number = Fraction(7, 10), fraction_basis: str = "pool",
              exclude_zero_risk: bool = False, bin_over_suite: bool = False,
              probabilities=None) -> Plan:
    policy = Policy(policy)
    if policy is Policy.RETEST_ALL:
        return plan_retest_all(suite)
    if policy is Policy.TSRA:
        return plan_tsra(suite, fraction, exclude_zero_risk=exclude_zero_risk,
                         probabilities=probabilities)
    if tree is None:
        raise ValueError(f"policy {policy.value!r} needs a decision tree")
    if policy is Policy.ATVM:
        return plan_atvm(suite, tree)
    return plan_pt(suite, tree, fraction, fraction_basis,
                   exclude_zero_risk=exclude_zero_risk, bin_over_suite=bin_over_suite)


def plan_to_dict(plan: Plan) -> dict:
    params = {k: json_number(v) if isinstance(v, Fraction) else v
              for k, v in plan.parameters.items()}
    entries = []
    for e in plan.entries.values():
        item = {"id": e.test_id, "disposition": e.disposition.value,
                "rationale": e.rationale.value}
        if e.risk is not None:
            item["re"] = json_number(e.risk.re)
            item["p"] = e.risk.p
            item["c"] = e.risk.c
        if e.classification is not None:
            item["path"] = [[q, a.value] for q, a in e.classification.path]
        entries.append(item)
    return {"policy": plan.policy.value, "parameters": params,
            "summary": plan.counts(), "entries": entries}


def dump_plan(plan: Plan) -> str:
    return json.dumps(plan_to_dict(plan), indent=2, ensure_ascii=False) + "\n"
