"""Loaders for the bundled evaluation fixtures.

Everything the harness consumes lives under housekeep/fixtures: the three
scenario files, the recorded dialogue, the follow-up questions, the routing
query set, and the spoken-report error injection. ``fixture_digest`` pins the
exact fixture bytes into report metadata so runs are attributable.
"""

from __future__ import annotations

import hashlib
import json
from importlib import resources
from pathlib import Path

from ..clockutil import from_iso_z
from ..memory import DialogueEntry
from .scoring import ExpectedElement, KnowledgeQuestion


def fixture_root() -> Path:
    return Path(str(resources.files("housekeep"))) / "fixtures"


def _read(name: str, fixture_dir: str | Path | None = None) -> dict:
    root = Path(fixture_dir) if fixture_dir else fixture_root()
    return json.loads((root / name).read_text(encoding="utf-8"))


def load_dialogue(fixture_dir: str | Path | None = None) -> tuple[DialogueEntry, ...]:
    doc = _read("kb_dialogue.json", fixture_dir)
    entries = tuple(
        DialogueEntry(
            question=item["question"],
            answer=item["answer"],
            timestamp=from_iso_z(item["timestamp"]),
            entry_id=item["entry_id"],
        )
        for item in doc["entries"]
    )
    if [e.entry_id for e in entries] != list(range(1, len(entries) + 1)):
        raise ValueError("dialogue entry ids must be 1..n in order")
    return entries


def load_questions(fixture_dir: str | Path | None = None) -> tuple[KnowledgeQuestion, ...]:
    doc = _read("kb_questions.json", fixture_dir)
    questions = []
    for item in doc["questions"]:
        questions.append(
            KnowledgeQuestion(
                id=item["id"],
                question=item["question"],
                kind=item["kind"],
                accept=tuple(item.get("accept") or ()),
                reject=tuple(item.get("reject") or ()),
                elements=tuple(
                    ExpectedElement(name=e["name"], accept=tuple(e["accept"]))
                    for e in item.get("elements") or ()
                ),
            )
        )
    return tuple(questions)


def load_routing_queries(fixture_dir: str | Path | None = None) -> tuple[dict, ...]:
    doc = _read("routing_queries.json", fixture_dir)
    return tuple(doc["queries"])


def load_spoken_overrides(fixture_dir: str | Path | None = None) -> dict[str, str]:
    doc = _read("error_injection.json", fixture_dir)
    return dict(doc["spoken_overrides"])


def script_path(name_or_path: str | Path) -> Path:
    """Resolve a scripted replay file: a real path wins, else a bundled name."""
    direct = Path(name_or_path)
    if direct.is_file():
        return direct
    stem = direct.name.removesuffix(".json")
    bundled = fixture_root() / "scripts" / f"{stem}.json"
    if bundled.is_file():
        return bundled
    raise FileNotFoundError(f"no scripted replay file for {str(name_or_path)!r}")


_FIXTURE_FILES = (
    "scenarios/dining_table.json",
    "scenarios/living_room.json",
    "scenarios/desk.json",
    "kb_dialogue.json",
    "kb_questions.json",
    "routing_queries.json",
    "error_injection.json",
)


def fixture_digest(fixture_dir: str | Path | None = None) -> str:
    """sha256 over the bundled fixture bytes, in a fixed file order."""
    root = Path(fixture_dir) if fixture_dir else fixture_root()
    h = hashlib.sha256()
    for rel in _FIXTURE_FILES:
        h.update(rel.encode("utf-8"))
        h.update(b"\x00")
        h.update((root / rel).read_bytes())
        h.update(b"\x00")
    return h.hexdigest()
