"""Test-suite data model, suite-file loading and defect ingestion."""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from typing import Any, Iterable, Mapping

from ._validation import json_number, to_fraction

logger = logging.getLogger(__name__)

QUESTION_IDS = range(1, 10)
COST_RANGE = (1, 5)
SEVERITY_RANGE = (1, 5)


class Answer(str, Enum):
    LOW = "L"
    MEDIUM = "M"
    HIGH = "H"

    @property
    def label(self) -> str:
        return self.name.capitalize()

    @classmethod
    def parse(cls, value: "Answer | str") -> "Answer":
        if isinstance(value, Answer):
            return value
        try:
            return cls(value)
        except ValueError:
            pass
        for member in cls:
            if isinstance(value, str) and value.lower() == member.label.lower():
                return member
        raise ValueError(f"unknown answer {value!r}; expected one of 'L', 'M', 'H'")


class Status(str, Enum):
    ACTIVE = "active"
    OBSOLETE = "obsolete"


@dataclass(frozen=True)
class DefectRecord:
    defect_id: str
    severity: int
    version: str

    def __post_init__(self):
        if isinstance(self.severity, bool) or not isinstance(self.severity, int) \
                or not SEVERITY_RANGE[0] <= self.severity <= SEVERITY_RANGE[1]:
            raise ValueError(f"defect {self.defect_id!r}: severity must be an integer in 1..5, "
                             f"got {self.severity!r}")


@dataclass(frozen=True)
class TimingProfile:
    manual_minutes: Fraction = Fraction(1)
    automated_minutes: Fraction = Fraction(1)
    automation_deploy_minutes: Fraction = Fraction(0)

    def __post_init__(self):
        for name in ("manual_minutes", "automated_minutes", "automation_deploy_minutes"):
            object.__setattr__(self, name, to_fraction(getattr(self, name), name=name))
        if self.manual_minutes <= 0:
            raise ValueError("manual_minutes must be > 0")
        if self.automated_minutes <= 0:
            raise ValueError("automated_minutes must be > 0")
        if self.automation_deploy_minutes < 0:
            raise ValueError("automation_deploy_minutes must be >= 0")


@dataclass(frozen=True)
class TestCase:
    id: str
    cost: int
    name: str = ""
    status: Status = Status.ACTIVE
    answers: Mapping[int, Answer] = field(default_factory=dict)
    weight: Fraction = Fraction(1)
    timing: TimingProfile = field(default_factory=TimingProfile)
    defects: tuple[DefectRecord, ...] = ()

    __test__ = False  # keep pytest from collecting this class

    def __post_init__(self):
        if not isinstance(self.id, str) or not self.id:
            raise ValueError("test id must be a non-empty string")
        if isinstance(self.cost, bool) or not isinstance(self.cost, int) \
                or not COST_RANGE[0] <= self.cost <= COST_RANGE[1]:
            raise ValueError(f"test {self.id!r}: cost must be an integer in 1..5, got {self.cost!r}")
        object.__setattr__(self, "status", Status(self.status))
        object.__setattr__(self, "weight", to_fraction(self.weight, name="weight"))
        if self.weight < 0:
            raise ValueError(f"test {self.id!r}: weight must be >= 0")
        answers = {}
        for q, a in dict(self.answers).items():
            if q not in QUESTION_IDS:
                raise ValueError(f"test {self.id!r}: unknown question id {q!r}")
            answers[q] = Answer.parse(a)
        object.__setattr__(self, "answers", dict(sorted(answers.items())))
        object.__setattr__(self, "defects", tuple(self.defects))

    @property
    def active(self) -> bool:
        return self.status is Status.ACTIVE


@dataclass(frozen=True)
class TestSuite:
    name: str
    tests: tuple[TestCase, ...]

    __test__ = False

    def __post_init__(self):
        object.__setattr__(self, "tests", tuple(self.tests))
        if not self.tests:
            raise ValueError("a suite must contain at least one test")
        seen = set()
        for t in self.tests:
            if t.id in seen:
                raise ValueError(f"duplicate test id {t.id!r}")
            seen.add(t.id)

    def __len__(self) -> int:
        return len(self.tests)

    def __getitem__(self, test_id: str) -> TestCase:
        for t in self.tests:
            if t.id == test_id:
                return t
        raise KeyError(test_id)

    def __contains__(self, test_id) -> bool:
        return any(t.id == test_id for t in self.tests)

    @property
    def ids(self) -> list[str]:
        return [t.id for t in self.tests]


@dataclass(frozen=True)
class Problem:
    path: str
    message: str
    test_id: str | None = None

    def __str__(self) -> str:
        where = self.path
        if self.test_id is not None:
            where = f"{where} (test {self.test_id!r})"
        return f"{where}: {self.message}"


class SuiteError(ValueError):
    """Raised when a suite document or defect batch fails validation.

    ``problems`` holds every violation found, each with its field path.
    """

    def __init__(self, problems: list[Problem]):
        self.problems = list(problems)
        super().__init__("\n".join(str(p) for p in self.problems))


_TEST_KEYS = {"id", "name", "cost", "status", "answers", "weight", "timing", "defects"}
_TIMING_KEYS = {"manual_minutes", "automated_minutes", "automation_deploy_minutes"}
_DEFECT_KEYS = {"id", "severity", "version"}


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _is_num(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


class _Collector:
    def __init__(self, strict: bool):
        self.strict = strict
        self.problems: list[Problem] = []

    def add(self, path, message, test_id=None):
        self.problems.append(Problem(path, message, test_id))

    def keys(self, obj: dict, allowed: set, path: str, test_id=None):
        if self.strict:
            for k in obj:
                if k not in allowed:
                    self.add(f"{path}.{k}", "unknown key", test_id)


def _parse_test(raw, path: str, col: _Collector) -> TestCase | None:
    if not isinstance(raw, dict):
        col.add(path, "test entry must be an object")
        return None
    tid = raw.get("id")
    if not isinstance(tid, str) or not tid:
        col.add(f"{path}.id", "must be a non-empty string")
        return None
    n_before = len(col.problems)
    col.keys(raw, _TEST_KEYS, path, tid)

    cost = raw.get("cost")
    if not _is_int(cost) or not 1 <= cost <= 5:
        col.add(f"{path}.cost", f"must be an integer in 1..5, got {cost!r}", tid)

    name = raw.get("name", "")
    if not isinstance(name, str):
        col.add(f"{path}.name", "must be a string", tid)

    status = raw.get("status", Status.ACTIVE.value)
    if status not in {s.value for s in Status}:
        col.add(f"{path}.status", f"must be 'active' or 'obsolete', got {status!r}", tid)

    answers = {}
    raw_answers = raw.get("answers", {})
    if not isinstance(raw_answers, dict):
        col.add(f"{path}.answers", "must be an object", tid)
    else:
        for key, letter in raw_answers.items():
            try:
                q = int(key)
            except (TypeError, ValueError):
                q = None
            if q is None or str(q) != str(key).strip() or q not in QUESTION_IDS:
                col.add(f"{path}.answers.{key}", "unknown question id (expected 1..9)", tid)
                continue
            if letter not in ("L", "M", "H"):
                col.add(f"{path}.answers.{key}", f"unknown answer letter {letter!r}", tid)
                continue
            answers[q] = Answer(letter)

    weight = raw.get("weight", 1)
    if not _is_num(weight) or weight < 0:
        col.add(f"{path}.weight", f"must be a number >= 0, got {weight!r}", tid)

    timing = None
    raw_timing = raw.get("timing", {})
    if not isinstance(raw_timing, dict):
        col.add(f"{path}.timing", "must be an object", tid)
    else:
        col.keys(raw_timing, _TIMING_KEYS, f"{path}.timing", tid)
        values = {}
        for key, default, positive in (("manual_minutes", 1, True),
                                       ("automated_minutes", 1, True),
                                       ("automation_deploy_minutes", 0, False)):
            v = raw_timing.get(key, default)
            if not _is_num(v) or (v <= 0 if positive else v < 0):
                bound = "> 0" if positive else ">= 0"
                col.add(f"{path}.timing.{key}", f"must be a number {bound}, got {v!r}", tid)
            else:
                values[key] = to_fraction(v)
        if len(values) == 3:
            timing = TimingProfile(**values)

    defects = []
    raw_defects = raw.get("defects", [])
    if not isinstance(raw_defects, list):
        col.add(f"{path}.defects", "must be a list", tid)
    else:
        for j, d in enumerate(raw_defects):
            dpath = f"{path}.defects[{j}]"
            if not isinstance(d, dict):
                col.add(dpath, "must be an object", tid)
                continue
            col.keys(d, _DEFECT_KEYS, dpath, tid)
            did, sev, ver = d.get("id"), d.get("severity"), d.get("version", "")
            if not isinstance(did, str) or not did:
                col.add(f"{dpath}.id", "must be a non-empty string", tid)
            elif not _is_int(sev) or not 1 <= sev <= 5:
                col.add(f"{dpath}.severity", f"must be an integer in 1..5, got {sev!r}", tid)
            elif not isinstance(ver, str):
                col.add(f"{dpath}.version", "must be a string", tid)
            else:
                defects.append(DefectRecord(did, sev, ver))

    if len(col.problems) > n_before:
        return None
    return TestCase(id=tid, name=name, cost=cost, status=Status(status), answers=answers,
                    weight=to_fraction(weight), timing=timing, defects=tuple(defects))


def suite_from_dict(doc: Any, *, strict: bool = True) -> TestSuite:
    col = _Collector(strict)
    if not isinstance(doc, dict):
        raise SuiteError([Problem("$", "suite document must be an object")])
    col.keys(doc, {"suite", "tests"}, "$")
    name = doc.get("suite", "")
    if not isinstance(name, str):
        col.add("$.suite", "must be a string")
    raw_tests = doc.get("tests")
    tests: list[TestCase] = []
    if not isinstance(raw_tests, list):
        col.add("$.tests", "must be a list")
    elif not raw_tests:
        col.add("$.tests", "a suite must contain at least one test")
    else:
        seen: dict[str, int] = {}
        for i, raw in enumerate(raw_tests):
            path = f"$.tests[{i}]"
            tid = raw.get("id") if isinstance(raw, dict) else None
            if isinstance(tid, str) and tid in seen:
                col.add(f"{path}.id", f"duplicate id (first used at $.tests[{seen[tid]}])", tid)
            elif isinstance(tid, str):
                seen[tid] = i
            test = _parse_test(raw, path, col)
            if test is not None:
                tests.append(test)
    if col.problems:
        raise SuiteError(col.problems)
    suite = TestSuite(name=name, tests=tuple(tests))
    for warning in suite_warnings(suite):
        logger.warning(warning)
    return suite


def load_suite(document: str | bytes, *, strict: bool = True) -> TestSuite:
    """Parse and validate a suite document (JSON text).

    Every violation is reported at once through :class:`SuiteError`, each
    entry carrying the offending test id and field path.
    """
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise SuiteError([Problem("$", f"malformed document: {exc}")]) from exc
    return suite_from_dict(doc, strict=strict)


def suite_warnings(suite: TestSuite) -> list[str]:
    return [f"test {t.id!r}: automated_minutes exceeds manual_minutes"
            for t in suite.tests
            if t.timing.automated_minutes > t.timing.manual_minutes]


def suite_to_dict(suite: TestSuite) -> dict:
    tests = []
    for t in suite.tests:
        tests.append({
            "id": t.id,
            "name": t.name,
            "cost": t.cost,
            "status": t.status.value,
            "answers": {str(q): a.value for q, a in t.answers.items()},
            "weight": json_number(t.weight),
            "timing": {
                "manual_minutes": json_number(t.timing.manual_minutes),
                "automated_minutes": json_number(t.timing.automated_minutes),
                "automation_deploy_minutes": json_number(t.timing.automation_deploy_minutes),
            },
            "defects": [{"id": d.defect_id, "severity": d.severity, "version": d.version}
                        for d in t.defects],
        })
    return {"suite": suite.name, "tests": tests}


def dump_suite(suite: TestSuite) -> str:
    return json.dumps(suite_to_dict(suite), indent=2) + "\n"


def active_tests(suite: TestSuite) -> list[TestCase]:
    return [t for t in suite.tests if t.active]


def ingest_defects(suite: TestSuite, version: str,
                   records: Iterable[tuple[str, str, int]]) -> TestSuite:
    """Append ``(test_id, defect_id, severity)`` records found in ``version``.

    Re-ingesting a (defect, version, test) triple that is already present is
    a no-op, so repeated CI runs are safe.
    """
    problems = []
    additions: dict[str, list[DefectRecord]] = {}
    for i, rec in enumerate(records):
        test_id, defect_id, severity = rec
        if test_id not in suite:
            problems.append(Problem(f"records[{i}].test", "unknown test id", test_id))
            continue
        if not _is_int(severity) or not 1 <= severity <= 5:
            problems.append(Problem(f"records[{i}].severity",
                                    f"must be an integer in 1..5, got {severity!r}", test_id))
            continue
        additions.setdefault(test_id, []).append(DefectRecord(str(defect_id), severity, version))
    if problems:
        raise SuiteError(problems)
    if not additions:
        return suite

    tests = []
    for t in suite.tests:
        new = additions.get(t.id)
        if not new:
            tests.append(t)
            continue
        known = {(d.defect_id, d.version) for d in t.defects}
        defects = list(t.defects)
        for d in new:
            if (d.defect_id, d.version) not in known:
                known.add((d.defect_id, d.version))
                defects.append(d)
        tests.append(t if len(defects) == len(t.defects) else replace(t, defects=tuple(defects)))
    return replace(suite, tests=tuple(tests))
