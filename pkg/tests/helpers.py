"""Random generators and brute-force oracles shared by the test modules."""
from __future__ import annotations

import math
import random
from fractions import Fraction

from rtsplan.suite import Answer, DefectRecord, TestCase, TestSuite, TimingProfile
from rtsplan.tree import Decision, DecisionTree, Leaf, QuestionNode, validate_tree

LETTERS = [a.value for a in Answer]


def oracle_probabilities(ns_by_id: dict[str, Fraction], n_by_id: dict[str, int]) -> dict[str, int]:
    """Quintile banding by counting, without sorting.

    A test's rank is the number of nonzero-defect tests with a strictly
    larger N*S; its percentile ``rank/m`` is matched against the five
    20-point bands.
    """
    nonzero = [t for t, n in n_by_id.items() if n > 0]
    m = len(nonzero)
    out = {}
    for tid in ns_by_id:
        if n_by_id[tid] == 0:
            out[tid] = 0
            continue
        rank = sum(1 for other in nonzero if ns_by_id[other] > ns_by_id[tid])
        pct = Fraction(rank, m)
        for band, p in enumerate((5, 4, 3, 2, 1)):
            lo, hi = Fraction(band, 5), Fraction(band + 1, 5)
            if lo <= pct < hi or (band == 4 and pct <= 1):
                out[tid] = p
                break
    return out


def oracle_select(res: list[tuple[str, Fraction]], fraction: Fraction,
                  exclude_zero: bool = False) -> list[str]:
    """Pick ids one at a time: repeatedly take the best remaining row."""
    quota = math.ceil(fraction * len(res))
    remaining = list(res)
    chosen = []
    while len(chosen) < quota and remaining:
        best = remaining[0]
        for row in remaining[1:]:
            if row[1] > best[1] or (row[1] == best[1] and row[0] < best[0]):
                best = row
        if exclude_zero and best[1] == 0:
            break
        chosen.append(best[0])
        remaining.remove(best)
    return chosen


def random_suite(rng: random.Random, n: int | None = None, *, answers: bool = True,
                 obsolete_rate: float = 0.0, max_defects: int = 4,
                 weights: bool = False) -> TestSuite:
    n = n if n is not None else rng.randint(1, 30)
    tests = []
    for i in range(n):
        n_def = rng.randint(0, max_defects)
        defects = tuple(DefectRecord(f"D{i}.{k}", rng.randint(1, 5), "v0") for k in range(n_def))
        tests.append(TestCase(
            id=f"t{i:03d}", cost=rng.randint(1, 5),
            status="obsolete" if rng.random() < obsolete_rate else "active",
            answers={q: LETTERS[rng.randrange(3)] for q in range(1, 10)} if answers else {},
            weight=Fraction(rng.randint(0, 8), 4) if weights else Fraction(1),
            timing=TimingProfile(rng.randint(10, 60), rng.randint(1, 6), rng.randint(30, 240)),
            defects=defects))
    return TestSuite("random", tuple(tests))


def random_tree(rng: random.Random, leaf_prob: float = 0.35) -> DecisionTree:
    """A random valid tree: no question repeats on a path, both leaf kinds present."""
    def build(available: list[int], depth: int):
        if not available or (depth > 0 and rng.random() < leaf_prob):
            return Leaf(rng.choice(list(Decision)))
        q = rng.choice(available)
        rest = [x for x in available if x != q]
        return QuestionNode(q, {a: build(rest, depth + 1) for a in Answer})

    while True:
        tree = DecisionTree(build(list(range(1, 10)), 0), label="random")
        if validate_tree(tree).ok:
            return tree
