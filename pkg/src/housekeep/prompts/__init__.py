"""Versioned prompt-pack loading.

Prompts live in plain-text files, one directory per pack version, so they can
be tuned without touching code. Loading validates each agent's contract
(router: exactly three handoff tools; planner: all five destination
definitions verbatim; historian: explicit no-fabrication instruction).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from ..gateway import ToolSpec
from ..historian import HistorianPromptConfig
from ..planner import PlannerPromptConfig
from ..router import RouterPromptConfig

DEFAULT_PACK = "pack_v1"


@dataclass(frozen=True)
class PromptPack:
    version: str
    router: RouterPromptConfig
    planner: PlannerPromptConfig
    historian: HistorianPromptConfig


def _pack_dir(name_or_path: str) -> Path:
    candidate = Path(name_or_path)
    if candidate.is_dir():
        return candidate
    return Path(str(resources.files(__package__))) / name_or_path


def load_pack(name_or_path: str = DEFAULT_PACK) -> PromptPack:
    """Load and validate a prompt pack by bundled name or directory path."""
    root = _pack_dir(name_or_path)
    manifest = json.loads((root / "pack.json").read_text(encoding="utf-8"))
    files = manifest["files"]
    tools = tuple(
        ToolSpec(t["name"], t["description"], t.get("parameters") or {"type": "object", "properties": {}})
        for t in json.loads((root / files["router_tools"]).read_text(encoding="utf-8"))
    )
    return PromptPack(
        version=manifest["version"],
        router=RouterPromptConfig(
            (root / files["router_prompt"]).read_text(encoding="utf-8"), tools
        ),
        planner=PlannerPromptConfig((root / files["planner_prompt"]).read_text(encoding="utf-8")),
        historian=HistorianPromptConfig(
            (root / files["historian_prompt"]).read_text(encoding="utf-8")
        ),
    )
