"""Risk-exposure scoring and top-fraction selection.

``RE(t) = weight * P(t) * C(t)`` where ``C`` is the test's 1..5 cost and
``P`` is a 0..5 severity probability obtained by banding ``N * S`` (defect
count times mean defect severity) across the scored population. All
arithmetic is exact (``fractions.Fraction``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from ._validation import Number, check_fraction, check_int_range, to_fraction
from .suite import TestCase, TestSuite, active_tests

N_BANDS = 5


@dataclass(frozen=True)
class DefectStats:
    test_id: str
    n: int
    s: Fraction
    ns: Fraction


@dataclass(frozen=True)
class RiskRow:
    test_id: str
    stats: DefectStats
    p: int
    c: int
    weight: Fraction
    re: Fraction


@dataclass(frozen=True)
class SelectionResult:
    selected: tuple[str, ...]
    excluded: tuple[str, ...]
    fraction: Fraction
    quota: int

    @property
    def shortfall(self) -> int:
        """How far the selection fell short of the quota (only when zero-risk
        rows were held back)."""
        return self.quota - len(self.selected)


def defect_stats(test: TestCase) -> DefectStats:
    n = len(test.defects)
    s = Fraction(sum(d.severity for d in test.defects), n) if n else Fraction(0)
    return DefectStats(test.id, n, s, n * s)


def severity_probabilities(stats: Iterable[DefectStats]) -> dict[str, int]:
    """Band ``N*S`` into P values 5..1 by quintile of the nonzero population.

    Tests without defects get 0. The remaining tests are ranked by ``ns``
    descending; rank ``i`` of ``m`` falls in band ``floor(5*i/m)`` and gets
    ``P = 5 - band``. Tied ``ns`` values all take the band of the first
    tied rank.
    """
    stats = list(stats)
    out = {st.test_id: 0 for st in stats}
    ranked = sorted((st for st in stats if st.n > 0), key=lambda st: st.ns, reverse=True)
    m = len(ranked)
    band_start = 0
    for i, st in enumerate(ranked):
        if i == 0 or st.ns != ranked[i - 1].ns:
            band_start = i
        out[st.test_id] = N_BANDS - (N_BANDS * band_start) // m
    return out


def risk_exposure(p: int, c: int, weight: Number = 1) -> Fraction:
    check_int_range(p, 0, 5, name="P")
    check_int_range(c, 1, 5, name="C")
    w = to_fraction(weight, name="weight")
    if w < 0:
        raise ValueError("weight must be >= 0")
    return w * p * c


def _row_key(row: RiskRow):
    return (-row.re, row.test_id)


def sort_rows(rows: Iterable[RiskRow]) -> list[RiskRow]:
    """RE descending, ties by ascending test id."""
    return sorted(rows, key=_row_key)


def score_suite(suite: TestSuite, restrict: Iterable[str] | None = None, *,
                bin_over_suite: bool = False,
                probabilities: Mapping[str, int] | None = None) -> list[RiskRow]:
    """Score active tests (or the ``restrict`` subset of them).

    P is banded over the scored population unless ``bin_over_suite`` is set,
    in which case every active test takes part in the banding. Explicit
    ``probabilities`` override the banding per test id; an override must keep
    ``P = 0`` exactly when the test has no defects.
    """
    active = active_tests(suite)
    if restrict is None:
        scored = active
    else:
        wanted = set(restrict)
        unknown = wanted - {t.id for t in active}
        if unknown:
            raise ValueError(f"restrict names tests that are not active: {sorted(unknown)}")
        scored = [t for t in active if t.id in wanted]
    if not scored:
        return []

    stats = {t.id: defect_stats(t) for t in (active if bin_over_suite else scored)}
    p_of = severity_probabilities(stats.values())
    for tid, p in (probabilities or {}).items():
        if tid not in stats:
            continue
        check_int_range(p, 0, 5, name=f"P override for {tid!r}")
        if (p == 0) != (stats[tid].n == 0):
            raise ValueError(f"P override for {tid!r} must be 0 exactly when the test has no defects")
        p_of[tid] = p

    rows = [RiskRow(t.id, stats[t.id], p_of[t.id], t.cost, t.weight,
                    risk_exposure(p_of[t.id], t.cost, t.weight))
            for t in scored]
    return sort_rows(rows)


def select_quota(rows: Sequence[RiskRow], quota: int,
                 exclude_zero_risk: bool = False) -> tuple[list[str], list[str]]:
    ordered = sort_rows(rows)
    selected, excluded = [], []
    for row in ordered:
        if len(selected) < quota and not (exclude_zero_risk and row.re == 0):
            selected.append(row.test_id)
        else:
            excluded.append(row.test_id)
    return selected, excluded


def select_top(rows: Sequence[RiskRow], fraction: Number,
               exclude_zero_risk: bool = False) -> SelectionResult:
    """Select the first ``ceil(fraction * n)`` rows by RE.

    With ``exclude_zero_risk`` rows whose RE is 0 are never picked, even when
    that leaves the quota unmet.
    """
    f = check_fraction(fraction)
    quota = math.ceil(f * len(rows))
    selected, excluded = select_quota(rows, quota, exclude_zero_risk)
    return SelectionResult(tuple(selected), tuple(excluded), f, quota)
