"""Bar-chart rendering for evaluation reports, one PNG per phase."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)

from .scoring import EvalReport


def _grouped_bars(ax, items: list[str], series: dict[str, list[float]], title: str) -> None:
    width = 0.8 / max(len(series), 1)
    for i, (name, values) in enumerate(series.items()):
        positions = [x + i * width for x in range(len(items))]
        ax.bar(positions, values, width=width, label=name)
    ax.set_xticks([x + 0.4 - width / 2 for x in range(len(items))])
    ax.set_xticklabels([i.replace("_", " ") for i in items], rotation=20, ha="right")
    ax.set_ylim(0, 100)
    ax.set_ylabel("percent")
    ax.set_title(title)
    ax.grid(axis="y", alpha=0.3)
    ax.legend(fontsize="small")


def _task_panels(report: EvalReport):
    items: list[str] = []
    for row in report.rows:
        for key in row.cells:
            item = key.split("/", 1)[0]
            if item not in items:
                items.append(item)
    for metric in ("strict", "lenient"):
        series = {
            row.model: [row.cells[f"{i}/{metric}"].percent for i in items] for row in report.rows
        }
        yield items, series, f"task planning accuracy ({metric})"


def _kb_panels(report: EvalReport):
    items: list[str] = []
    methods: list[str] = []
    for row in report.rows:
        if row.method not in methods:
            methods.append(row.method)
        for key in row.cells:
            if key not in items:
                items.append(key)
    for method in methods:
        series = {
            row.model: [row.cells[i].percent for i in items]
            for row in report.rows
            if row.method == method
        }
        yield items, series, f"answer validity ({(method or '').replace('_', ' ')})"


def _routing_panels(report: EvalReport):
    items: list[str] = []
    for row in report.rows:
        for key in row.cells:
            if key not in items:
                items.append(key)
    series = {row.model: [row.cells[i].percent for i in items] for row in report.rows}
    yield items, series, "routing success rate"


def render_figure(report: EvalReport, path: str | Path) -> None:
    if report.phase == "task_planning":
        panels = list(_task_panels(report))
    elif report.phase == "knowledge_base":
        panels = list(_kb_panels(report))
    else:
        panels = list(_routing_panels(report))

    fig, axes = plt.subplots(1, max(len(panels), 1), figsize=(6 * max(len(panels), 1), 4.5))
    if len(panels) <= 1:
        axes = [axes]
    if panels:
        for ax, (items, series, title) in zip(axes, panels):
            _grouped_bars(ax, items, series, title)
    else:
        axes[0].set_title("no rows")
    fig.tight_layout()
    # fixed metadata keeps the PNG bytes stable across identical runs
    fig.savefig(path, dpi=110, metadata={"Software": "housekeep"})
    plt.close(fig)
