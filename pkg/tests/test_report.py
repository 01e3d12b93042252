import csv

import pytest

from housekeep.evalharness.report import (
    CSV_COLUMNS,
    render_text,
    write_csv,
    write_json,
    write_outputs,
    write_text,
)
from housekeep.evalharness.runner import ModelSpec, RunSpec, run_phase


@pytest.fixture(scope="module")
def kb_report():
    from housekeep.evalharness.fixtures import script_path

    spec = ModelSpec(name="qwen_like", script=str(script_path("qwen_like")))
    return run_phase(RunSpec(phase="knowledge_base", models=[spec]))


@pytest.fixture(scope="module")
def routing_report():
    from housekeep.evalharness.fixtures import script_path

    models = [
        ModelSpec(name="qwen_like", script=str(script_path("qwen_like"))),
        ModelSpec(name="gemma_stand_in", script=str(script_path("qwen_like")), supports_tool_calling=False),
    ]
    return run_phase(RunSpec(phase="routing", models=models, repetitions=1))


def test_csv_shape_and_counts(kb_report, tmp_path):
    path = tmp_path / "kb.csv"
    write_csv(kb_report, path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == CSV_COLUMNS
    cell_count = sum(len(r.cells) for r in kb_report.rows)
    assert len(rows) == 1 + cell_count

    by_key = {(r[1], r[2], r[3]): r for r in rows[1:]}
    total = by_key[("qwen_like", "total", "validity_with_rag")]
    assert total[0] == "knowledge_base"
    assert total[6] == "100.0"
    # fractional numerators survive the trip as exact reprs
    trash = by_key[("qwen_like", "trash_status", "validity_without_rag")]
    assert trash[4] == "3.75"
    assert trash[5] == "5"


def test_json_round_trips_counts(kb_report, tmp_path):
    import json

    path = tmp_path / "kb.json"
    write_json(kb_report, path)
    doc = json.loads(path.read_text(encoding="utf-8"))
    assert doc["phase"] == "knowledge_base"
    first = doc["rows"][0]["cells"]["error_detection"]
    assert first["percent"] == 100.0 * first["numerator"] / first["denominator"]
    assert doc["metadata"]["prompt_pack"]


def test_text_table_layout(kb_report):
    text = render_text(kb_report)
    assert text.startswith("phase: knowledge_base")
    assert "Knowledge base answer validity, percent" in text
    lines = text.splitlines()
    header_line = next(l for l in lines if l.startswith("Model"))
    assert "Method" in header_line
    assert any("with RAG" in l for l in lines)
    assert any("without RAG" in l for l in lines)


def test_text_table_reports_exclusions(routing_report):
    text = render_text(routing_report)
    assert "Routing success rate, percent" in text
    assert "excluded: gemma_stand_in" in text


def test_write_outputs_manifest_and_figure(kb_report, tmp_path):
    names = write_outputs(kb_report, tmp_path / "out")
    assert names == {
        "text": "knowledge_base.txt",
        "json": "knowledge_base.json",
        "csv": "knowledge_base.csv",
        "figure": "knowledge_base.png",
    }
    for name in names.values():
        target = tmp_path / "out" / name
        assert target.is_file() and target.stat().st_size > 0
    png = (tmp_path / "out" / names["figure"]).read_bytes()
    assert png.startswith(b"\x89PNG")


def test_written_reports_are_deterministic(kb_report, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    write_outputs(kb_report, a)
    write_outputs(kb_report, b)
    for name in ("knowledge_base.txt", "knowledge_base.json", "knowledge_base.csv", "knowledge_base.png"):
        assert (a / name).read_bytes() == (b / name).read_bytes(), name


def test_task_text_table_pairs_strict_and_lenient(tmp_path):
    from housekeep.evalharness.fixtures import script_path

    spec = ModelSpec(name="qwen_like", script=str(script_path("qwen_like")))
    report = run_phase(RunSpec(phase="task_planning", models=[spec], repetitions=1))
    text = render_text(report)
    assert "Task planning accuracy, percent (strict / lenient)" in text
    assert "Dining table" in text and "Total" in text
    write_text(report, tmp_path / "task.txt")
    assert (tmp_path / "task.txt").read_text(encoding="utf-8") == text
