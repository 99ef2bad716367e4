"""Text, CSV and JSON renderings of risk tables, classifications and plans.

Every rendering of a computation shows the same numbers: rationals are
printed with at most six fractional digits, trailing zeros trimmed.
"""
from __future__ import annotations

import csv
import io
import json
from typing import Sequence

from ._validation import format_number, json_number
from .planner import Plan, dump_plan
from .risk import RiskRow
from .tree import QUESTIONS, Classification, MissingAnswer

FORMATS = ("table", "csv", "json")
RISK_COLUMNS = ["id", "C", "N", "S", "NS", "P", "RE"]


def render_table(headers: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    widths = [len(h) for h in headers]
    for row in rows:
        widths = [max(w, len(str(c))) for w, c in zip(widths, row)]
    line = "  ".join(h.ljust(w) for h, w in zip(headers, widths)).rstrip()
    out = [line, "  ".join("-" * w for w in widths)]
    for row in rows:
        out.append("  ".join(str(c).ljust(w) for c, w in zip(row, widths)).rstrip())
    return "\n".join(out) + "\n"


def render_csv(headers: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(headers)
    writer.writerows(rows)
    return buf.getvalue()


def _risk_cells(row: RiskRow) -> list[str]:
    st = row.stats
    return [row.test_id, str(row.c), str(st.n), format_number(st.s), format_number(st.ns),
            str(row.p), format_number(row.re)]


def render_risk(rows: Sequence[RiskRow], fmt: str = "table",
                selected: set[str] | None = None) -> str:
    headers = list(RISK_COLUMNS)
    if selected is not None:
        headers.append("selected")
    cells = []
    for r in rows:
        c = _risk_cells(r)
        if selected is not None:
            c.append("yes" if r.test_id in selected else "no")
        cells.append(c)
    if fmt == "json":
        items = []
        for r in rows:
            item = {"id": r.test_id, "C": r.c, "N": r.stats.n, "S": json_number(r.stats.s),
                    "NS": json_number(r.stats.ns), "P": r.p, "RE": json_number(r.re)}
            if selected is not None:
                item["selected"] = r.test_id in selected
            items.append(item)
        return json.dumps({"rows": items}, indent=2) + "\n"
    if fmt == "csv":
        return render_csv(headers, cells)
    return render_table(headers, cells)


def _class_cells(tid: str, result, explain: bool) -> list[str]:
    if isinstance(result, MissingAnswer):
        return [tid, f"missing answer: Q{result.question}", ""]
    return [tid, result.decision.label, result.render_path() if explain else ""]


def explain_lines(result: Classification) -> list[str]:
    lines = []
    for q, a in result.path:
        topic, text = QUESTIONS[q]
        lines.append(f"Q{q} {topic}: {text} -> {a.label}")
    return lines


def render_classifications(results: dict, fmt: str = "table", explain: bool = False) -> str:
    if fmt == "json":
        items = []
        for tid, r in results.items():
            if isinstance(r, MissingAnswer):
                items.append({"id": tid, "decision": None, "missing_question": r.question})
            else:
                items.append({"id": tid, "decision": r.decision.value,
                              "path": [[q, a.value] for q, a in r.path]})
        return json.dumps({"classifications": items}, indent=2, ensure_ascii=False) + "\n"
    headers = ["id", "decision", "path"]
    cells = [_class_cells(tid, r, True) for tid, r in results.items()]
    if fmt == "csv":
        return render_csv(headers, cells)
    if not explain:
        return render_table(headers[:2], [c[:2] for c in cells])
    out = []
    for tid, r in results.items():
        if isinstance(r, MissingAnswer):
            out.append(f"{tid}: missing answer: Q{r.question}")
            continue
        out.append(f"{tid}: {r.decision.label}; {r.render_path()}")
        out.extend(f"    {line}" for line in explain_lines(r))
    return "\n".join(out) + ("\n" if out else "")


def plan_summary(plan: Plan) -> str:
    c = plan.counts()
    return (f"{plan.policy.value}: automate={c['automate']} select={c['select-manual']} "
            f"run={c['run-manual']} skip={c['skip']}\n")


def render_plan(plan: Plan, fmt: str = "table") -> str:
    if fmt == "json":
        return dump_plan(plan)
    headers = ["id", "disposition", "rationale", "RE", "path"]
    cells = []
    for e in plan.entries.values():
        cells.append([e.test_id, e.disposition.value, e.rationale.value,
                      format_number(e.risk.re) if e.risk is not None else "",
                      e.classification.render_path() if e.classification is not None else ""])
    if fmt == "csv":
        return render_csv(headers, cells)
    return render_table(headers, cells) + plan_summary(plan)
