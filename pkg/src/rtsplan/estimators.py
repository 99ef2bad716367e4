"""scikit-learn compatible wrappers.

The functional API in :mod:`rtsplan.tree`, :mod:`rtsplan.risk` and
:mod:`rtsplan.planner` does the work; these classes expose it with
``fit``/``predict``, ``get_params``/``set_params`` and ``clone`` support so
policies can be swept like any other estimator.

Risk selection and planning are population-level: P is banded over the
whole scored population and the cutoff depends on its size. ``predict``
therefore plans the suite it is given as a whole, using the fitted
hyperparameters.
"""
from __future__ import annotations

from typing import Any, Mapping

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_choice, check_fraction
from .planner import FRACTION_BASES, Plan, Policy, make_plan
from .risk import score_suite, select_top
from .suite import Answer, QUESTION_IDS, TestSuite, active_tests, suite_from_dict
from .tree import (Decision, DecisionTree, classify, default_tree, load_tree, tree_from_dict,
                   validate_tree)

_MISSING = (None, "", "-")


def check_suite(X: Any) -> TestSuite:
    """Accept a :class:`TestSuite` or a parsed suite document."""
    if isinstance(X, TestSuite):
        return X
    if isinstance(X, Mapping):
        return suite_from_dict(dict(X))
    raise TypeError(f"expected a TestSuite or suite document, got {type(X).__name__}")


def check_tree(tree: Any) -> DecisionTree:
    if isinstance(tree, DecisionTree):
        report = validate_tree(tree)
        if not report.ok:
            raise ValueError("invalid tree: " + "; ".join(report.violations))
        return tree
    if tree is None or tree == "default":
        return default_tree()
    if isinstance(tree, Mapping):
        return tree_from_dict(dict(tree))
    if isinstance(tree, str):
        return load_tree(tree)
    raise TypeError(f"cannot interpret {type(tree).__name__} as a decision tree")


def _is_missing(value) -> bool:
    if value is None:
        return True
    if isinstance(value, float) and value != value:
        return True
    return isinstance(value, str) and value in _MISSING


def check_answers(X: Any) -> list[dict[int, Answer]]:
    """Normalise answers to one ``{question: Answer}`` dict per row.

    ``X`` is either a sequence of mappings keyed by question id, or a
    2-D array-like with nine columns (question 1 first) holding answer
    letters, where ``None``/``""``/NaN mark an unanswered question.
    """
    if isinstance(X, TestSuite):
        return [dict(t.answers) for t in active_tests(X)]
    if isinstance(X, np.ndarray) and X.ndim == 2:
        rows = X.tolist()
    else:
        rows = list(X)
    out = []
    for i, row in enumerate(rows):
        answers: dict[int, Answer] = {}
        if isinstance(row, Mapping):
            items = row.items()
        else:
            row = list(row)
            if len(row) != len(QUESTION_IDS):
                raise ValueError(f"row {i}: expected {len(QUESTION_IDS)} answer columns, "
                                 f"got {len(row)}")
            items = zip(QUESTION_IDS, row)
        for q, a in items:
            q = int(q)
            if q not in QUESTION_IDS:
                raise ValueError(f"row {i}: unknown question id {q}")
            if not _is_missing(a):
                answers[q] = Answer.parse(a)
        out.append(answers)
    return out


class AutomationTreeClassifier(ClassifierMixin, BaseEstimator):
    """Classify tests as ``"automate"`` or ``"manual"`` with a viability tree.

    Parameters
    ----------
    tree : DecisionTree, mapping, path or "default"
        The tree to walk. Nothing is learned from data; ``fit`` only
        resolves and validates the tree.
    """

    def __init__(self, tree="default"):
        self.tree = tree

    def fit(self, X=None, y=None):
        self.tree_ = check_tree(self.tree)
        self.classes_ = np.array([d.value for d in Decision])
        return self

    def decision_path(self, X):
        check_is_fitted(self, "tree_")
        return [classify(self.tree_, answers) for answers in check_answers(X)]

    def predict(self, X):
        return np.array([c.decision.value for c in self.decision_path(X)], dtype=object)


class RiskSelector(BaseEstimator):
    """Select the highest risk-exposure fraction of a suite."""

    def __init__(self, fraction=0.7, exclude_zero_risk=False, bin_over_suite=False):
        self.fraction = fraction
        self.exclude_zero_risk = exclude_zero_risk
        self.bin_over_suite = bin_over_suite

    def _score(self, suite: TestSuite):
        rows = score_suite(suite, bin_over_suite=self.bin_over_suite)
        return rows, select_top(rows, self.fraction, self.exclude_zero_risk)

    def fit(self, X, y=None):
        check_fraction(self.fraction)
        suite = check_suite(X)
        self.rows_, self.selection_ = self._score(suite)
        self.ids_ = [t.id for t in active_tests(suite)]
        return self

    def transform(self, X) -> np.ndarray:
        """Risk exposure of each active test, in suite order."""
        check_is_fitted(self, "rows_")
        suite = check_suite(X)
        rows, _ = self._score(suite)
        re = {r.test_id: float(r.re) for r in rows}
        return np.array([re[t.id] for t in active_tests(suite)])

    def predict(self, X) -> np.ndarray:
        """Boolean mask of selected tests, in suite order."""
        check_is_fitted(self, "rows_")
        suite = check_suite(X)
        _, selection = self._score(suite)
        chosen = set(selection.selected)
        return np.array([t.id in chosen for t in active_tests(suite)])


class RegressionTestPlanner(BaseEstimator):
    """Build a test plan for one policy.

    ``policy`` is one of ``retest-all``, ``tsra``, ``atvm`` or ``pt``. After
    ``fit`` the plan is available as ``plan_``; ``predict`` returns the
    disposition of each active test in suite order.
    """

    def __init__(self, policy="pt", tree="default", fraction=0.7, fraction_basis="pool",
                 exclude_zero_risk=False, bin_over_suite=False):
        self.policy = policy
        self.tree = tree
        self.fraction = fraction
        self.fraction_basis = fraction_basis
        self.exclude_zero_risk = exclude_zero_risk
        self.bin_over_suite = bin_over_suite

    def _plan(self, suite: TestSuite) -> Plan:
        return make_plan(self.policy_, suite, self.tree_, fraction=self.fraction,
                         fraction_basis=self.fraction_basis,
                         exclude_zero_risk=self.exclude_zero_risk,
                         bin_over_suite=self.bin_over_suite)

    def fit(self, X, y=None):
        self.policy_ = Policy(self.policy)
        check_fraction(self.fraction)
        check_choice(self.fraction_basis, FRACTION_BASES, name="fraction_basis")
        needs_tree = self.policy_ in (Policy.ATVM, Policy.PT)
        self.tree_ = check_tree(self.tree) if needs_tree else None
        self.plan_ = self._plan(check_suite(X))
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "plan_")
        suite = check_suite(X)
        plan = self._plan(suite)
        return np.array([plan.entries[t.id].disposition.value for t in active_tests(suite)],
                        dtype=object)

    def fit_predict(self, X, y=None) -> np.ndarray:
        suite = check_suite(X)
        self.fit(suite)
        return np.array([self.plan_.entries[t.id].disposition.value
                         for t in active_tests(suite)], dtype=object)
