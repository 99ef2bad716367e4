"""Automation-viability decision trees.

Trees are data: question nodes branch on the three answer letters and end
in ``automate`` / ``manual`` leaves. Nothing here learns a tree; trees are
read from JSON documents and walked.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from typing import Any, Iterator, Mapping, Union

from .suite import Answer, QUESTION_IDS, TestSuite, active_tests

MAX_DEPTH = 9

# (topic, question) keyed by question id, used when explaining a path.
QUESTIONS: dict[int, tuple[str, str]] = {
    1: ("Frequency", "How many efforts is this test supposed to be executed?"),
    2: ("Reuse", "Can this test or parts of it be reused in other tests?"),
    3: ("Relevance", "How would you describe the importance of this test case?"),
    4: ("Automation effort", "Does this test take a lot of effort to be deployed?"),
    5: ("Resources", "How many members of your team should be allocated or how expensive "
                     "is the equipment needed during this test's manual execution?"),
    6: ("Manual Complexity", "Is this test difficult to be executed manually? Does it have "
                             "any embedded confidential information?"),
    7: ("Automation Tool", "How would you describe the reliability of the automation tool "
                           "to be used?"),
    8: ("Porting", "How portable is this test?"),
    9: ("Execution effort", "Does this require a lot of effort to be executed manually?"),
}


class Decision(str, Enum):
    AUTOMATE = "automate"
    MANUAL = "manual"

    @property
    def label(self) -> str:
        return self.name.capitalize()


@dataclass(frozen=True)
class Leaf:
    decision: Decision


@dataclass(frozen=True, eq=True)
class QuestionNode:
    question: int
    branches: Mapping[Answer, "TreeNode"] = field(hash=False)


TreeNode = Union[QuestionNode, Leaf]


@dataclass(frozen=True)
class DecisionTree:
    root: TreeNode
    label: str = ""
    comment: str = ""


@dataclass(frozen=True)
class Classification:
    decision: Decision
    path: tuple[tuple[int, Answer], ...]

    def render_path(self) -> str:
        return " → ".join(f"{q}:{a.value}" for q, a in self.path)


class MissingAnswer(LookupError):
    """The traversal reached a question the test has no answer for."""

    def __init__(self, question: int, test_id: str | None = None):
        self.question = question
        self.test_id = test_id
        where = f"test {test_id!r}: " if test_id is not None else ""
        super().__init__(f"{where}missing answer: Q{question}")


class TreeError(ValueError):
    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("\n".join(self.violations))


@dataclass
class ValidationReport:
    violations: list[str]
    reachable: dict[int, bool]

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def notes(self) -> list[str]:
        return [f"question {q} is never asked" for q, seen in self.reachable.items() if not seen]


def _node_from_obj(obj: Any, path: str, errors: list[str]) -> TreeNode | None:
    if not isinstance(obj, dict):
        errors.append(f"{path}: node must be an object")
        return None
    if "decision" in obj:
        extra = set(obj) - {"decision"}
        if extra:
            errors.append(f"{path}: unexpected keys on leaf: {sorted(extra)}")
        try:
            return Leaf(Decision(obj["decision"]))
        except ValueError:
            errors.append(f"{path}: leaf decision must be 'automate' or 'manual', "
                          f"got {obj['decision']!r}")
            return None
    q = obj.get("question")
    extra = set(obj) - {"question", "branches"}
    if extra:
        errors.append(f"{path}: unexpected keys on question node: {sorted(extra)}")
    if isinstance(q, bool) or not isinstance(q, int) or q not in QUESTION_IDS:
        errors.append(f"{path}: question id must be an integer in 1..9, got {q!r}")
        q = None
    raw = obj.get("branches")
    if not isinstance(raw, dict):
        errors.append(f"{path}: question node needs a 'branches' object")
        return None
    for letter in raw:
        if letter not in ("H", "M", "L"):
            errors.append(f"{path}: unknown branch letter {letter!r}")
    branches = {}
    for letter in ("H", "M", "L"):
        if letter not in raw:
            errors.append(f"{path}: question {q} missing branch {letter!r}")
            continue
        child = _node_from_obj(raw[letter], f"{path}/{q}{letter}", errors)
        if child is not None:
            branches[Answer(letter)] = child
    if q is None or len(branches) != 3:
        return None
    return QuestionNode(q, branches)


def tree_from_dict(doc: Any) -> DecisionTree:
    if not isinstance(doc, dict) or "root" not in doc:
        raise TreeError(["$: tree document must be an object with a 'root' node"])
    errors: list[str] = []
    extra = set(doc) - {"label", "comment", "root"}
    if extra:
        errors.append(f"$: unexpected keys {sorted(extra)}")
    root = _node_from_obj(doc["root"], "root", errors)
    if errors or root is None:
        raise TreeError(errors or ["root: invalid node"])
    tree = DecisionTree(root=root, label=str(doc.get("label", "")),
                        comment=str(doc.get("comment", "")))
    report = validate_tree(tree)
    if not report.ok:
        raise TreeError(report.violations)
    return tree


def parse_tree(document: str | bytes) -> DecisionTree:
    """Parse a tree document and reject anything that fails validation."""
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise TreeError([f"$: malformed document: {exc}"]) from exc
    return tree_from_dict(doc)


def _node_to_obj(node: TreeNode) -> dict:
    if isinstance(node, Leaf):
        return {"decision": node.decision.value}
    return {"question": node.question,
            "branches": {a.value: _node_to_obj(node.branches[a])
                         for a in (Answer.HIGH, Answer.MEDIUM, Answer.LOW)}}


def tree_to_dict(tree: DecisionTree) -> dict:
    return {"label": tree.label, "comment": tree.comment, "root": _node_to_obj(tree.root)}


def iter_paths(node: TreeNode, prefix=()) -> Iterator[tuple[tuple[tuple[int, Answer], ...], Leaf]]:
    """Yield every root-to-leaf path with its leaf."""
    if isinstance(node, Leaf):
        yield prefix, node
        return
    for a in (Answer.HIGH, Answer.MEDIUM, Answer.LOW):
        yield from iter_paths(node.branches[a], prefix + ((node.question, a),))


def questions_in(node: TreeNode) -> set[int]:
    if isinstance(node, Leaf):
        return set()
    out = {node.question}
    for child in node.branches.values():
        out |= questions_in(child)
    return out


def subtree(tree: DecisionTree, path) -> TreeNode:
    """Follow ``path`` (``(question, answer)`` pairs) from the root."""
    node = tree.root
    for q, a in path:
        if not isinstance(node, QuestionNode) or node.question != q:
            raise ValueError(f"path step ({q}, {a}) does not match the tree")
        node = node.branches[Answer.parse(a)]
    return node


def validate_tree(tree: DecisionTree) -> ValidationReport:
    violations: list[str] = []
    decisions = set()

    def walk(node, path):
        if isinstance(node, Leaf):
            decisions.add(node.decision)
            return
        trail = "/".join(f"{q}{a.value}" for q, a in path) or "root"
        asked = [q for q, _ in path]
        if node.question in asked:
            violations.append(f"question {node.question} repeats on path {trail}")
        if len(path) + 1 > MAX_DEPTH:
            violations.append(f"path {trail} exceeds depth {MAX_DEPTH}")
            return
        if node.question not in QUESTION_IDS:
            violations.append(f"{trail}: question id {node.question} outside 1..9")
        missing = [a.value for a in Answer if a not in node.branches]
        if missing:
            violations.append(f"{trail}: question {node.question} missing branches {missing}")
        for a in (Answer.HIGH, Answer.MEDIUM, Answer.LOW):
            if a in node.branches:
                walk(node.branches[a], path + ((node.question, a),))

    walk(tree.root, ())
    for d in Decision:
        if d not in decisions:
            violations.append(f"no {d.value!r} leaf is reachable")
    present = questions_in(tree.root)
    return ValidationReport(violations, {q: q in present for q in QUESTION_IDS})


def classify(tree: DecisionTree, answers: Mapping[int, Answer | str]) -> Classification:
    """Walk the tree using only the answers the path actually asks for."""
    node = tree.root
    path = []
    while isinstance(node, QuestionNode):
        try:
            raw = answers[node.question]
        except KeyError:
            raise MissingAnswer(node.question) from None
        if raw is None:
            raise MissingAnswer(node.question)
        a = Answer.parse(raw)
        path.append((node.question, a))
        node = node.branches[a]
    return Classification(node.decision, tuple(path))


def classify_suite(tree: DecisionTree,
                   suite: TestSuite) -> dict[str, Classification | MissingAnswer]:
    out: dict[str, Classification | MissingAnswer] = {}
    for t in active_tests(suite):
        try:
            out[t.id] = classify(tree, t.answers)
        except MissingAnswer as exc:
            out[t.id] = MissingAnswer(exc.question, t.id)
    return out


def load_tree(spec: str) -> DecisionTree:
    """``"default"`` or a path to a tree file."""
    if spec == "default":
        return default_tree()
    with open(spec, encoding="utf-8") as fh:
        return parse_tree(fh.read())


_DEFAULT: DecisionTree | None = None


def default_tree() -> DecisionTree:
    global _DEFAULT
    if _DEFAULT is None:
        text = resources.files("rtsplan").joinpath("data/default_tree.json").read_text("utf-8")
        _DEFAULT = parse_tree(text)
    return _DEFAULT
