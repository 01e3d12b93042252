"""Report writers: aligned text tables, JSON with raw counts, and flat CSV.

All writers are deterministic functions of the report so scripted runs can be
compared byte for byte. The CSV is one line per cell with the counts the
percentage was computed from; the JSON carries full metadata (models,
temperature, k, prompt pack version, fixture digest).
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

from .scoring import EvalCell, EvalReport, format_percent

CSV_COLUMNS = ("phase", "model", "item", "metric", "numerator", "denominator", "percent")


def _label(key: str) -> str:
    return key.replace("_", " ").capitalize()


def _num(value: float) -> str:
    return str(int(value)) if value == int(value) else repr(value)


def _cell_rows(report: EvalReport):
    """Flatten to (model, item, metric, cell) preserving report order."""
    for row in report.rows:
        for key, cell in row.cells.items():
            if report.phase == "task_planning":
                item, metric = key.split("/", 1)
            elif report.phase == "knowledge_base":
                item, metric = key, f"validity_{row.method}"
            else:
                item, metric = key, "routing_success"
            yield row.model, item, metric, cell


def write_csv(report: EvalReport, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for model, item, metric, cell in _cell_rows(report):
            writer.writerow(
                [
                    report.phase,
                    model,
                    item,
                    metric,
                    _num(cell.numerator),
                    _num(cell.denominator),
                    format_percent(cell.percent),
                ]
            )


def write_json(report: EvalReport, path: str | Path) -> None:
    Path(path).write_text(json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8")


# --- text tables -------------------------------------------------------------------

def _render_table(headers: list[str], rows: list[list[str]]) -> str:
    widths = [max(len(h), *(len(r[i]) for r in rows)) for i, h in enumerate(headers)]
    lines = [
        "  ".join(h.ljust(w) for h, w in zip(headers, widths)).rstrip(),
        "  ".join("-" * w for w in widths),
    ]
    for row in rows:
        lines.append("  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip())
    return "\n".join(lines)


def _pct(cell: EvalCell | None) -> str:
    return format_percent(cell.percent) if cell is not None else "-"


def _task_table(report: EvalReport) -> str:
    items: list[str] = []
    for row in report.rows:
        for key in row.cells:
            item = key.split("/", 1)[0]
            if item not in items:
                items.append(item)
    headers = ["Model"] + [_label(i) for i in items]
    rows = []
    for row in report.rows:
        line = [row.model]
        for item in items:
            strict = row.cells.get(f"{item}/strict")
            lenient = row.cells.get(f"{item}/lenient")
            line.append(f"{_pct(strict)} / {_pct(lenient)}")
        rows.append(line)
    title = "Task planning accuracy, percent (strict / lenient)"
    return f"{title}\n{_render_table(headers, rows)}"


def _kb_table(report: EvalReport) -> str:
    items: list[str] = []
    for row in report.rows:
        for key in row.cells:
            if key not in items:
                items.append(key)
    headers = ["Model", "Method"] + [_label(i) for i in items]
    method_label = {"with_rag": "with RAG", "without_rag": "without RAG"}
    rows = []
    for row in report.rows:
        line = [row.model, method_label.get(row.method or "", row.method or "-")]
        line.extend(_pct(row.cells.get(item)) for item in items)
        rows.append(line)
    title = "Knowledge base answer validity, percent"
    return f"{title}\n{_render_table(headers, rows)}"


def _routing_table(report: EvalReport) -> str:
    items: list[str] = []
    for row in report.rows:
        for key in row.cells:
            if key not in items:
                items.append(key)
    headers = ["Model"] + [_label(i) for i in items]
    rows = []
    for row in report.rows:
        rows.append([row.model] + [_pct(row.cells.get(item)) for item in items])
    table = _render_table(headers, rows) if rows else "(no models evaluated)"
    lines = [f"Routing success rate, percent\n{table}"]
    for entry in report.metadata.get("excluded_models", []):
        lines.append(f"excluded: {entry['name']} ({entry['reason']})")
    return "\n".join(lines)


def render_text(report: EvalReport) -> str:
    meta = report.metadata
    header = (
        f"phase: {report.phase} | repetitions: {meta.get('repetitions')} | "
        f"k: {meta.get('k')} | prompt pack: {meta.get('prompt_pack')} | "
        f"fixtures: {str(meta.get('fixture_digest'))[:12]}"
    )
    if report.phase == "task_planning":
        body = _task_table(report)
    elif report.phase == "knowledge_base":
        body = _kb_table(report)
    else:
        body = _routing_table(report)
    parts = [header, "", body]
    if report.warnings:
        parts.append("")
        parts.extend(f"warning: {w}" for w in report.warnings)
    return "\n".join(parts) + "\n"


def write_text(report: EvalReport, path: str | Path) -> None:
    Path(path).write_text(render_text(report), encoding="utf-8")


def write_outputs(report: EvalReport, outdir: str | Path) -> dict[str, str]:
    """Write text, JSON, CSV, and the bar-chart PNG into outdir.

    Returns name -> filename relative to outdir, so manifests stay portable.
    """
    from .figures import render_figure  # matplotlib import deferred until needed

    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    stem = report.phase
    names = {
        "text": f"{stem}.txt",
        "json": f"{stem}.json",
        "csv": f"{stem}.csv",
        "figure": f"{stem}.png",
    }
    write_text(report, outdir / names["text"])
    write_json(report, outdir / names["json"])
    write_csv(report, outdir / names["csv"])
    render_figure(report, outdir / names["figure"])
    return names
