"""Command-line interface.

Exit codes: 0 success, 1 unclassifiable tests, 2 validation or parse
failure, 3 I/O failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
from pathlib import Path

from . import __version__
from .planner import FRACTION_BASES, Policy, PlanningError, make_plan
from .report import (FORMATS, plan_summary, render_classifications, render_plan, render_risk)
from .risk import score_suite, select_top
from .simulation import compare, dump_scenario, generate_scenario, load_scenario, with_seed
from .suite import SuiteError, dump_suite, ingest_defects, load_suite, suite_warnings
from ._validation import check_fraction
from .tree import MissingAnswer, TreeError, classify_suite, default_tree, parse_tree, validate_tree

EXIT_OK, EXIT_DOMAIN, EXIT_INVALID, EXIT_IO = 0, 1, 2, 3

log = logging.getLogger("rtsplan")


class CommandError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CommandError(f"cannot read {path}: {exc.strerror or exc}", EXIT_IO) from exc


def _suite(args):
    return load_suite(_read(args.suite), strict=not args.lenient)


def _tree(spec: str):
    if spec == "default":
        return default_tree()
    return parse_tree(_read(spec))


def write_atomic(path: str, text: str) -> None:
    """Write ``text`` to ``path`` through a temp file and rename."""
    target = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{target.name}.", dir=target.parent or ".")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(args, text: str) -> None:
    if args.out:
        try:
            write_atomic(args.out, text)
        except OSError as exc:
            raise CommandError(f"cannot write {args.out}: {exc.strerror or exc}", EXIT_IO) from exc
    else:
        sys.stdout.write(text)


def _say(args, text: str) -> None:
    if not args.quiet:
        sys.stdout.write(text)


def cmd_validate(args) -> int:
    if bool(args.tree) == bool(args.suite):
        raise CommandError("validate needs exactly one of --tree or --suite", EXIT_INVALID)
    if args.tree:
        tree = _tree(args.tree)
        report = validate_tree(tree)
        lines = [f"tree {tree.label or args.tree!r}: valid"]
        lines += [f"note: {n}" for n in report.notes]
    else:
        suite = _suite(args)
        lines = [f"suite {suite.name!r}: valid ({len(suite)} tests)"]
        lines += [f"warning: {w}" for w in suite_warnings(suite)]
    _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_classify(args) -> int:
    suite = _suite(args)
    tree = _tree(args.tree)
    results = classify_suite(tree, suite)
    _emit(args, render_classifications(results, args.format, args.explain))
    missing = [r for r in results.values() if isinstance(r, MissingAnswer)]
    for m in missing:
        log.error(str(m))
    return EXIT_DOMAIN if missing else EXIT_OK


def _probabilities(path: str | None) -> dict | None:
    if path is None:
        return None
    doc = json.loads(_read(path))
    if not isinstance(doc, dict):
        raise CommandError(f"{path}: expected an object mapping test id to P", EXIT_INVALID)
    return {str(k): v for k, v in doc.items()}


def cmd_score(args) -> int:
    suite = _suite(args)
    rows = score_suite(suite, bin_over_suite=False, probabilities=_probabilities(args.probabilities))
    selected = None
    if args.fraction is not None:
        selected = set(select_top(rows, args.fraction, args.exclude_zero_risk).selected)
    _emit(args, render_risk(rows, args.format, selected))
    return EXIT_OK


def cmd_plan(args) -> int:
    suite = _suite(args)
    policy = Policy(args.policy)
    tree = _tree(args.tree) if policy in (Policy.ATVM, Policy.PT) else None
    try:
        plan = make_plan(policy, suite, tree, fraction=args.fraction,
                         fraction_basis=args.fraction_basis,
                         exclude_zero_risk=args.exclude_zero_risk,
                         bin_over_suite=args.bin_over_suite,
                         probabilities=_probabilities(args.probabilities))
    except PlanningError as exc:
        for m in exc.missing:
            log.error(str(m))
        return EXIT_DOMAIN
    if args.out:
        _emit(args, render_plan(plan, "json"))
        _say(args, plan_summary(plan))
    else:
        _emit(args, render_plan(plan, args.format))
    return EXIT_OK


def cmd_simulate(args) -> int:
    if args.scenario != "reference" and not os.path.exists(args.scenario):
        raise CommandError(f"cannot read {args.scenario}: no such file", EXIT_IO)
    try:
        scenario = load_scenario(args.scenario)
    except OSError as exc:
        raise CommandError(f"cannot read scenario input: {exc}", EXIT_IO) from exc
    if args.seed is not None:
        scenario = with_seed(scenario, args.seed)
    policies = None
    if args.policies:
        policies = [p.strip() for chunk in args.policies for p in chunk.split(",") if p.strip()]
    report = compare(scenario, policies)
    text = {"table": report.to_table, "csv": report.to_csv, "json": report.to_json}[args.format]()
    _emit(args, text)
    return EXIT_OK


def _records(path: str) -> list[tuple[str, str, int]]:
    doc = json.loads(_read(path))
    if isinstance(doc, dict):
        doc = doc.get("records")
    if not isinstance(doc, list):
        raise CommandError(f"{path}: expected a list of defect records", EXIT_INVALID)
    out = []
    for i, r in enumerate(doc):
        if not isinstance(r, dict) or not {"test", "id", "severity"} <= set(r):
            raise CommandError(f"{path}: record {i} needs 'test', 'id' and 'severity'",
                               EXIT_INVALID)
        out.append((str(r["test"]), str(r["id"]), r["severity"]))
    return out


def cmd_ingest(args) -> int:
    suite = _suite(args)
    updated = ingest_defects(suite, args.version, _records(args.records))
    _emit(args, dump_suite(updated))
    return EXIT_OK


def cmd_generate_scenario(args) -> int:
    scenario = generate_scenario(args.tests, args.versions, args.fault_rate, args.seed,
                                 history_rate=args.history_rate, lanes=args.lanes,
                                 risk_overhead_minutes_per_test=args.risk_overhead)
    _emit(args, dump_scenario(scenario))
    return EXIT_OK


def _fraction(text: str):
    try:
        return check_fraction(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=FORMATS, default=argparse.SUPPRESS,
                        help="output format (default: table)")
    common.add_argument("--out", default=argparse.SUPPRESS, metavar="PATH",
                        help="write output to PATH instead of stdout")
    common.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(prog="rtsplan",
                                     description="Regression-test planning and campaign simulation.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--format", choices=FORMATS, default="table")
    parser.add_argument("--out", default=None, metavar="PATH")
    parser.add_argument("--quiet", action="store_true", default=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def suite_arg(p, required=True):
        p.add_argument("--suite", required=required, help="suite file")
        p.add_argument("--lenient", action="store_true", help="ignore unknown keys")

    p = sub.add_parser("validate", parents=[common], help="validate a tree or suite file")
    p.add_argument("--tree", help="tree file, or 'default'")
    suite_arg(p, required=False)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("classify", parents=[common], help="classify tests for automation")
    suite_arg(p)
    p.add_argument("--tree", default="default")
    p.add_argument("--explain", action="store_true", help="show the traversed questions")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("score", parents=[common], help="risk-exposure table")
    suite_arg(p)
    p.add_argument("--fraction", type=_fraction, help="mark the top fraction as selected")
    p.add_argument("--exclude-zero-risk", action="store_true")
    p.add_argument("--probabilities", metavar="FILE",
                   help="JSON object fixing P per test id instead of banding")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("plan", parents=[common], help="build a test plan")
    suite_arg(p)
    p.add_argument("--tree", default="default")
    p.add_argument("--policy", choices=[x.value for x in Policy], default="pt")
    p.add_argument("--fraction", type=_fraction, default=_fraction("0.7"))
    p.add_argument("--fraction-basis", choices=FRACTION_BASES, default="pool")
    p.add_argument("--exclude-zero-risk", action="store_true")
    p.add_argument("--bin-over-suite", action="store_true",
                   help="band P over all active tests rather than the scored pool")
    p.add_argument("--probabilities", metavar="FILE",
                   help="JSON object fixing P per test id (tsra only)")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("simulate", parents=[common], help="compare policies over a campaign")
    p.add_argument("--scenario", required=True, help="scenario file, or 'reference'")
    p.add_argument("--policies", action="append",
                   help="comma-separated policies (default: all four)")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("ingest", parents=[common], help="append detected defects to a suite")
    suite_arg(p)
    p.add_argument("--version", dest="version", required=True, help="version label")
    p.add_argument("--records", required=True,
                   help="JSON list of {test, id, severity} defect records")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("generate-scenario", parents=[common], help="generate a random scenario")
    p.add_argument("--tests", type=int, default=20)
    p.add_argument("--versions", type=int, default=3)
    p.add_argument("--fault-rate", type=_fraction, default=_fraction("0.1"))
    p.add_argument("--history-rate", type=float, default=0.5)
    p.add_argument("--lanes", type=int, default=4)
    p.add_argument("--risk-overhead", type=float, default=2.0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_generate_scenario)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except CommandError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (SuiteError, TreeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except json.JSONDecodeError as exc:
        print(f"error: malformed JSON: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
