"""Deterministic household world: scenario layouts, observation, plan execution.

Replaces camera perception and the physical robot. Each scenario fixture
carries the perceived object list, the user command, and an authored gold map
(strict destination, lenient alternatives, stationary flag) used by the
evaluation harness.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime
from importlib import resources
from pathlib import Path

from .domain import (
    DESTINATIONS,
    MoveEvent,
    ObjectObservation,
    TaskPlan,
    WorldState,
    make_observations,
)

SCENARIO_IDS = ("dining_table", "living_room", "desk")

SKIP_OBJECT_NOT_PRESENT = "ObjectNotPresent"


class UnknownScenario(Exception):
    def __init__(self, scenario_id: str):
        super().__init__(f"unknown scenario: {scenario_id!r}")
        self.scenario_id = scenario_id


@dataclass(frozen=True)
class GoldEntry:
    destination: str | None  # None iff stationary
    lenient: tuple[str, ...]
    stationary: bool
    rationale: str

    def __post_init__(self):
        if self.stationary:
            if self.destination is not None or self.lenient:
                raise ValueError("stationary objects have no gold destination and an empty lenient set")
        else:
            if self.destination not in DESTINATIONS or self.destination == "stationary":
                raise ValueError(f"invalid gold destination: {self.destination!r}")
            for alt in self.lenient:
                if alt not in DESTINATIONS or alt == "stationary":
                    raise ValueError(f"invalid lenient destination: {alt!r}")


@dataclass(frozen=True)
class Scenario:
    id: str
    cleanup_zone: str
    command: str
    objects: tuple[str, ...]
    gold: dict[str, GoldEntry]

    def __post_init__(self):
        if set(self.objects) != set(self.gold):
            raise ValueError(f"scenario {self.id}: gold map must cover exactly the observed objects")

    def observations(self) -> tuple[ObjectObservation, ...]:
        return make_observations(list(self.objects))

    def initial_state(self) -> WorldState:
        return WorldState(placements={obj: self.cleanup_zone for obj in self.objects})


def _fixture_root() -> Path:
    return Path(str(resources.files("housekeep"))) / "fixtures"


def load_scenario(scenario_id: str, fixture_dir: str | Path | None = None) -> Scenario:
    root = Path(fixture_dir) if fixture_dir else _fixture_root() / "scenarios"
    path = root / f"{scenario_id}.json"
    if not path.is_file():
        raise UnknownScenario(scenario_id)
    doc = json.loads(path.read_text(encoding="utf-8"))
    gold = {
        name: GoldEntry(
            destination=entry["destination"],
            lenient=tuple(entry.get("lenient") or ()),
            stationary=bool(entry["stationary"]),
            rationale=entry.get("rationale", ""),
        )
        for name, entry in doc["gold"].items()
    }
    return Scenario(
        id=doc["id"],
        cleanup_zone=doc["cleanup_zone"],
        command=doc["command"],
        objects=tuple(doc["objects"]),
        gold=gold,
    )


def load_all_scenarios() -> dict[str, Scenario]:
    return {sid: load_scenario(sid) for sid in SCENARIO_IDS}


def observe(scenario: Scenario) -> tuple[ObjectObservation, ...]:
    """The perceived object list, verbatim and in fixture order."""
    return scenario.observations()


# --- execution -----------------------------------------------------------------

@dataclass(frozen=True)
class ExecutedMove:
    object: str
    origin: str
    destination: str  # what actually happened (lands in the event log)
    spoken_destination: str  # what the user is told; differs only under error injection

    def to_dict(self) -> dict:
        return {
            "object": self.object,
            "from": self.origin,
            "to": self.destination,
            "spoken_to": self.spoken_destination,
        }


@dataclass(frozen=True)
class SkippedObject:
    object: str
    destination: str
    reason: str

    def to_dict(self) -> dict:
        return {"object": self.object, "destination": self.destination, "reason": self.reason}


@dataclass(frozen=True)
class ExecutionOutcome:
    executed: tuple[ExecutedMove, ...]
    skipped: tuple[SkippedObject, ...]
    state: WorldState

    def to_dict(self) -> dict:
        return {
            "executed": [m.to_dict() for m in self.executed],
            "skipped": [s.to_dict() for s in self.skipped],
        }


def _destination_location(dest_id: str) -> str:
    return "with_user" if dest_id == "user_handover" else dest_id


def execute(
    plan: TaskPlan,
    state: WorldState,
    at: datetime,
    spoken_override: dict[str, str] | None = None,
) -> ExecutionOutcome:
    """Run a validated plan against a world snapshot.

    Moves every planned object from its current location to the step
    destination; objects not present in the world are skipped with a reason,
    never aborting the plan. ``spoken_override`` (object -> destination id)
    changes only the destination reported to the user; the event log always
    holds the executed one.
    """
    spoken_override = spoken_override or {}
    placements = dict(state.placements)
    events: list[MoveEvent] = []
    executed: list[ExecutedMove] = []
    skipped: list[SkippedObject] = []
    for step in plan.steps:
        for obj in step.objects:
            origin = placements.get(obj)
            if origin is None:
                skipped.append(SkippedObject(obj, step.destination, SKIP_OBJECT_NOT_PRESENT))
                continue
            location = _destination_location(step.destination)
            events.append(MoveEvent(at, obj, origin, location))
            placements[obj] = location
            executed.append(
                ExecutedMove(
                    obj,
                    origin,
                    step.destination,
                    spoken_override.get(obj, step.destination),
                )
            )
    new_state = WorldState(placements=placements, event_log=state.event_log + tuple(events))
    return ExecutionOutcome(tuple(executed), tuple(skipped), new_state)
