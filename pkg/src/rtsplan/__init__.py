"""Regression-test planning toolkit.

Classify tests for automation with a viability decision tree, score them by
risk exposure, build retest-all / risk-selection / automation / hybrid test
plans, and simulate multi-version campaigns to compare the policies.
"""
from .planner import (Disposition, Plan, PlanEntry, PlanningError, Policy, Rationale,
                      make_plan, plan_atvm, plan_pt, plan_retest_all, plan_tsra)
from .risk import (DefectStats, RiskRow, SelectionResult, defect_stats, risk_exposure,
                   score_suite, select_top, severity_probabilities)
from .simulation import (CampaignMetrics, ComparisonReport, Fault, Scenario, ScenarioParams,
                         VersionSpec, compare, generate_scenario, load_scenario,
                         reference_scenario, run_campaign)
from .suite import (Answer, DefectRecord, Status, SuiteError, TestCase, TestSuite,
                    TimingProfile, active_tests, dump_suite, ingest_defects, load_suite)
from .tree import (QUESTIONS, Classification, Decision, DecisionTree, Leaf, MissingAnswer,
                   QuestionNode, TreeError, classify, classify_suite, default_tree,
                   parse_tree, validate_tree)

__version__ = "0.1.0"

__all__ = [
    "Disposition",
    "Plan",
    "PlanEntry",
    "PlanningError",
    "Policy",
    "Rationale",
    "make_plan",
    "plan_atvm",
    "plan_pt",
    "plan_retest_all",
    "plan_tsra",
    "DefectStats",
    "RiskRow",
    "SelectionResult",
    "defect_stats",
    "risk_exposure",
    "score_suite",
    "select_top",
    "severity_probabilities",
    "CampaignMetrics",
    "ComparisonReport",
    "Fault",
    "Scenario",
    "ScenarioParams",
    "VersionSpec",
    "compare",
    "generate_scenario",
    "load_scenario",
    "reference_scenario",
    "run_campaign",
    "Answer",
    "DefectRecord",
    "Status",
    "SuiteError",
    "TestCase",
    "TestSuite",
    "TimingProfile",
    "active_tests",
    "dump_suite",
    "ingest_defects",
    "load_suite",
    "QUESTIONS",
    "Classification",
    "Decision",
    "DecisionTree",
    "Leaf",
    "MissingAnswer",
    "QuestionNode",
    "TreeError",
    "classify",
    "classify_suite",
    "default_tree",
    "parse_tree",
    "validate_tree",
]
