"""Task planning agent: prompt construction and plan extraction/validation.

The agent must answer with chain-of-thought prose plus one JSON document in
the published schema::

    {"tasks": [{"objects": ["Plate", "Fork"], "destination": "sink"}]}

Extraction prefers a fenced code block and otherwise scans for the first
balanced-brace span that parses; the scan is a single pass over the reply.
Stationary objects are expressed by omission; an explicit "stationary"
destination is accepted and treated the same way.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from .domain import (
    DESTINATIONS,
    ObjectObservation,
    PLACEMENT_DESTINATIONS,
    TaskPlan,
    TaskStep,
    UnknownDestination,
    UserRequest,
    parse_destination,
)
from .gateway import ChatBackend, ChatMessage


class ExtractionError(Exception):
    """Base class for plan extraction failures."""


class NoJsonFound(ExtractionError):
    def __init__(self):
        super().__init__("reply contains no parseable JSON document")


class MalformedPlan(ExtractionError):
    def __init__(self, detail: str):
        super().__init__(f"JSON parses but does not match the plan schema: {detail}")
        self.detail = detail


class PlanningFailed(Exception):
    """Terminal planning failure; both raw replies are preserved."""

    def __init__(self, cause: Exception, replies: list[str]):
        super().__init__(f"planning failed after retry: {cause}")
        self.cause = cause
        self.replies = replies


CORRECTIVE_SUFFIX = (
    "Your previous reply did not contain a JSON action plan. "
    "Respond with the JSON object only."
)


@dataclass(frozen=True)
class PlannerPromptConfig:
    system_prompt: str

    def __post_init__(self):
        # The five placement definitions must appear verbatim in the prompt.
        missing = [
            DESTINATIONS[d].description
            for d in PLACEMENT_DESTINATIONS
            if DESTINATIONS[d].description not in self.system_prompt
        ]
        if missing:
            raise ValueError(f"planner prompt is missing destination definitions: {missing}")


@dataclass(frozen=True)
class PlanExtraction:
    plan: TaskPlan
    warnings: tuple[str, ...] = ()


@dataclass
class PlannerRun:
    """Full outcome of one planning call, for session records and eval."""

    plan: TaskPlan
    warnings: tuple[str, ...]
    retried: bool
    replies: list[str] = field(default_factory=list)


def build_prompt(
    objects: tuple[ObjectObservation, ...] | list[ObjectObservation],
    request: UserRequest,
    config: PlannerPromptConfig,
) -> list[ChatMessage]:
    """System message with destinations and schema; user message with the scene."""
    if not objects:
        raise ValueError("objects must be non-empty")
    listing = "\n".join(f"{i + 1}. {obs.name}" for i, obs in enumerate(objects))
    user = f"Observed objects:\n{listing}\n\nRequest: {request.text}"
    return [ChatMessage("system", config.system_prompt), ChatMessage("user", user)]


def _candidate_documents(text: str):
    """Yield candidate JSON strings: fenced blocks first, then balanced-brace spans.

    The brace scan walks the text once, tracking string/escape state and brace
    depth; each character is visited a constant number of times.
    """
    for match in re.finditer(r"```(?:json)?\s*(.*?)```", text, re.DOTALL | re.IGNORECASE):
        block = match.group(1).strip()
        if block:
            yield block

    start = None
    depth = 0
    in_string = False
    escaped = False
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if start is None:
            if ch == "{":
                start = i
                depth = 1
                in_string = False
                escaped = False
        else:
            if in_string:
                if escaped:
                    escaped = False
                elif ch == "\\":
                    escaped = True
                elif ch == '"':
                    in_string = False
            elif ch == '"':
                in_string = True
            elif ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
                if depth == 0:
                    yield text[start : i + 1]
                    start = None
        i += 1


def extract_plan(
    reply: ChatMessage,
    objects: tuple[ObjectObservation, ...] | list[ObjectObservation],
) -> PlanExtraction:
    """Locate and validate the plan document inside an assistant reply.

    Raises NoJsonFound, MalformedPlan, or UnknownDestination. Non-fatal issues
    (unknown object names, duplicate assignments) become warnings: unknown
    names are dropped, duplicates resolve first-wins.
    """
    if reply.role != "assistant":
        raise ValueError("extract_plan expects an assistant reply")

    document = None
    for candidate in _candidate_documents(reply.content or ""):
        try:
            document = json.loads(candidate)
        except json.JSONDecodeError:
            continue
        break
    if document is None:
        raise NoJsonFound()

    if not isinstance(document, dict):
        raise MalformedPlan(f"top level is {type(document).__name__}, expected object")
    tasks = document.get("tasks")
    if not isinstance(tasks, list):
        raise MalformedPlan("missing 'tasks' list")

    by_name = {obs.name.casefold(): obs.name for obs in objects}
    warnings: list[str] = []
    assigned: set[str] = set()
    steps: list[TaskStep] = []
    for idx, task in enumerate(tasks):
        if not isinstance(task, dict):
            raise MalformedPlan(f"task {idx} is not an object")
        raw_objects = task.get("objects")
        raw_destination = task.get("destination")
        if not isinstance(raw_objects, list) or not all(isinstance(o, str) for o in raw_objects):
            raise MalformedPlan(f"task {idx} lacks an 'objects' string list")
        if not isinstance(raw_destination, str):
            raise MalformedPlan(f"task {idx} lacks a 'destination' string")

        destination = parse_destination(raw_destination)  # may raise UnknownDestination
        kept: list[str] = []
        for name in raw_objects:
            canonical = by_name.get(name.strip().casefold())
            if canonical is None:
                warnings.append(f"unknown object {name!r} dropped from step {idx}")
                continue
            if canonical in assigned:
                warnings.append(f"duplicate assignment for {canonical!r}; first wins")
                continue
            assigned.add(canonical)
            kept.append(canonical)

        if destination == "stationary":
            # explicit no-task assignment: expressed by omission
            continue
        if not kept:
            if raw_objects:
                warnings.append(f"step {idx} dropped: no valid objects remain")
            continue
        steps.append(TaskStep(tuple(kept), destination))

    plan = TaskPlan(tuple(steps), raw_agent_text=reply.content or "")
    return PlanExtraction(plan, tuple(warnings))


def run_planner(
    request: UserRequest,
    objects: tuple[ObjectObservation, ...] | list[ObjectObservation],
    config: PlannerPromptConfig,
    backend: ChatBackend,
) -> PlannerRun:
    """build_prompt -> chat -> extract_plan, with one corrective retry on NoJsonFound."""
    messages = build_prompt(objects, request, config)
    reply = backend.chat(messages)
    replies = [reply.content]
    try:
        extraction = extract_plan(reply, objects)
        return PlannerRun(extraction.plan, extraction.warnings, retried=False, replies=replies)
    except NoJsonFound:
        pass
    except (MalformedPlan, UnknownDestination) as exc:
        raise PlanningFailed(exc, replies) from exc

    retry_messages = [
        messages[0],
        ChatMessage("user", messages[1].content + "\n\n" + CORRECTIVE_SUFFIX),
    ]
    retry_reply = backend.chat(retry_messages)
    replies.append(retry_reply.content)
    try:
        extraction = extract_plan(retry_reply, objects)
    except ExtractionError as exc:
        raise PlanningFailed(exc, replies) from exc
    except UnknownDestination as exc:
        raise PlanningFailed(exc, replies) from exc
    return PlannerRun(extraction.plan, extraction.warnings, retried=True, replies=replies)


def plan(
    request: UserRequest,
    objects: tuple[ObjectObservation, ...] | list[ObjectObservation],
    config: PlannerPromptConfig,
    backend: ChatBackend,
) -> TaskPlan:
    """Convenience wrapper returning just the validated plan."""
    return run_planner(request, objects, config, backend).plan
