"""Core vocabulary: objects, destinations, requests, plans, and world snapshots.

Everything in here is an immutable value type; instances are safe to share
across threads and sessions.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum

from .clockutil import to_iso_z


class DomainError(Exception):
    """Base class for domain-level failures."""


class UnknownDestination(DomainError):
    def __init__(self, text: str):
        super().__init__(f"unknown destination: {text!r}")
        self.text = text


class InconsistentEvent(DomainError):
    def __init__(self, obj: str, expected: str, actual: str):
        super().__init__(
            f"event moves {obj!r} from {expected!r} but it is at {actual!r}"
        )
        self.object = obj
        self.expected = expected
        self.actual = actual


# --- Destinations -----------------------------------------------------------

@dataclass(frozen=True)
class Destination:
    id: str
    description: str


# The five placement destinations given to the planning agent, plus two
# synthetic ids: user_handover (hand an item to the user) and stationary
# (the explicit form of "leave it where it is").
DESTINATIONS: dict[str, Destination] = {
    d.id: d
    for d in (
        Destination("sink", "Sink - For items that need washing."),
        Destination("trash_can", "Trash Can - For disposable or inedible items."),
        Destination("fridge", "Fridge - For perishable food."),
        Destination("food_shelf", "Food Shelf - For non-perishable food items."),
        Destination("storage_box", "Storage Box - For general storage."),
        Destination("user_handover", "User Handover - For items the user asked to receive directly."),
        Destination("stationary", "Stationary - For items that must remain in place; assign no task."),
    )
}

PLACEMENT_DESTINATIONS = ("sink", "trash_can", "fridge", "food_shelf", "storage_box")

_DESTINATION_SYNONYMS = {
    "sink": "sink",
    "kitchen sink": "sink",
    "trash can": "trash_can",
    "trash": "trash_can",
    "trashcan": "trash_can",
    "garbage": "trash_can",
    "garbage can": "trash_can",
    "bin": "trash_can",
    "waste bin": "trash_can",
    "fridge": "fridge",
    "refrigerator": "fridge",
    "food shelf": "food_shelf",
    "shelf": "food_shelf",
    "pantry": "food_shelf",
    "storage box": "storage_box",
    "storage": "storage_box",
    "box": "storage_box",
    "user handover": "user_handover",
    "handover": "user_handover",
    "hand over": "user_handover",
    "hand to user": "user_handover",
    "user": "user_handover",
    "to user": "user_handover",
    "stationary": "stationary",
    "none": "stationary",
    "no task": "stationary",
    "stay": "stationary",
    "leave in place": "stationary",
    "keep": "stationary",
}

_NORMALIZE_RE = re.compile(r"[^a-z0-9]+")


def _normalize_label(text: str) -> str:
    return _NORMALIZE_RE.sub(" ", text.casefold()).strip()


def parse_destination(text: str) -> str:
    """Map an agent-emitted destination string onto a canonical destination id.

    Case-insensitive and tolerant of punctuation/underscores ("Trash Can",
    "trash_can", "garbage" all map to trash_can). Raises UnknownDestination
    for anything outside the closed synonym table.
    """
    key = _normalize_label(text)
    canonical = _DESTINATION_SYNONYMS.get(key)
    if canonical is None:
        raise UnknownDestination(text)
    return canonical


def destination_phrase(dest_id: str) -> str:
    """Human phrasing used in narrations, e.g. trash_can -> "the trash can"."""
    if dest_id == "user_handover":
        return "you"
    return "the " + dest_id.replace("_", " ")


# --- Observations, requests, routing ----------------------------------------

@dataclass(frozen=True)
class ObjectObservation:
    name: str
    observation_index: int

    def __post_init__(self):
        if not self.name.strip():
            raise ValueError("observation name must be non-empty")


def make_observations(names: list[str]) -> tuple[ObjectObservation, ...]:
    """Build an observation list, enforcing case-folded uniqueness."""
    seen: set[str] = set()
    out = []
    for i, name in enumerate(names):
        key = name.strip().casefold()
        if key in seen:
            raise ValueError(f"duplicate observation name: {name!r}")
        seen.add(key)
        out.append(ObjectObservation(name.strip(), i))
    return tuple(out)


@dataclass(frozen=True)
class UserRequest:
    text: str
    session_id: str
    received_at: datetime

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError("request text must be non-empty")


class RouteCategory(str, Enum):
    ACTION_COMMAND = "action_command"
    HISTORY_QUERY = "history_query"
    UNCLEAR = "unclear"


@dataclass(frozen=True)
class RouteDecision:
    category: RouteCategory
    clarification_prompt: str | None = None
    # how the category was obtained: tool_call | keyword_fallback | undecidable_default
    provenance: str = "tool_call"

    def __post_init__(self):
        needs_prompt = self.category is RouteCategory.UNCLEAR
        has_prompt = bool(self.clarification_prompt)
        if needs_prompt != has_prompt:
            raise ValueError("clarification_prompt must be present iff category is unclear")


# --- Plans -------------------------------------------------------------------

@dataclass(frozen=True)
class TaskStep:
    objects: tuple[str, ...]
    destination: str

    def __post_init__(self):
        if not self.objects:
            raise ValueError("step must involve at least one object")
        if self.destination not in DESTINATIONS or self.destination == "stationary":
            raise ValueError(f"invalid step destination: {self.destination!r}")


@dataclass(frozen=True)
class TaskPlan:
    steps: tuple[TaskStep, ...]
    raw_agent_text: str = ""

    def __post_init__(self):
        seen: set[str] = set()
        for step in self.steps:
            for obj in step.objects:
                key = obj.casefold()
                if key in seen:
                    raise ValueError(f"object {obj!r} appears in more than one step")
                seen.add(key)

    def assignment(self) -> dict[str, str]:
        """Flattened object -> destination map."""
        return {obj: step.destination for step in self.steps for obj in step.objects}

    def to_schema(self) -> dict:
        """Serialize to the published plan wire schema."""
        return {
            "tasks": [
                {"objects": list(step.objects), "destination": step.destination}
                for step in self.steps
            ]
        }


# --- World state -------------------------------------------------------------

@dataclass(frozen=True)
class MoveEvent:
    timestamp: datetime
    object: str
    origin: str
    destination: str

    def to_dict(self) -> dict:
        return {
            "timestamp": to_iso_z(self.timestamp),
            "object": self.object,
            "from": self.origin,
            "to": self.destination,
        }


@dataclass(frozen=True)
class WorldState:
    placements: dict[str, str] = field(default_factory=dict)
    event_log: tuple[MoveEvent, ...] = ()

    def location_of(self, obj: str) -> str | None:
        return self.placements.get(obj)

    def to_dict(self) -> dict:
        return {
            "placements": dict(sorted(self.placements.items())),
            "event_log": [e.to_dict() for e in self.event_log],
        }


def replay(initial: WorldState, events: list[MoveEvent] | tuple[MoveEvent, ...]) -> WorldState:
    """Apply a chronologically ordered event list to a state.

    Raises InconsistentEvent when an event's origin disagrees with the current
    placement of the object. replay(S, []) is S; replay is a left fold, so
    replay(replay(S, E1), E2) == replay(S, E1 + E2).
    """
    placements = dict(initial.placements)
    for event in events:
        current = placements.get(event.object)
        if current != event.origin:
            raise InconsistentEvent(event.object, event.origin, str(current))
        placements[event.object] = event.destination
    return WorldState(placements=placements, event_log=initial.event_log + tuple(events))
