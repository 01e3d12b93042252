"""The canonical scripted walkthrough used for replay checks and demos.

Three sessions, one per scenario: each gets its cleanup command, the living
room session additionally takes the four follow-up questions (its world holds
the misreported jacket), an indirect request, and an unintelligible one. The
bundled replay scripts cover every prompt this flow produces.
"""

from __future__ import annotations

from dataclasses import dataclass

from .evalharness.fixtures import load_questions, load_spoken_overrides
from .orchestrator import Engine, Session
from .simulator import load_scenario

CLARIFY_MUMBLE = "Do the thing with the stuff."
TRASH_QUESTION = "How many objects are in the trash can?"


@dataclass(frozen=True)
class DemoFlow:
    scenario_id: str
    inject_spoken_errors: bool
    turns: tuple[str, ...]


def demo_flows() -> tuple[DemoFlow, ...]:
    questions = tuple(q.question for q in load_questions())
    return (
        DemoFlow(
            "dining_table",
            False,
            (load_scenario("dining_table").command, TRASH_QUESTION),
        ),
        DemoFlow(
            "living_room",
            True,
            (
                load_scenario("living_room").command,
                *questions,
                "Can I have a banana?",
                CLARIFY_MUMBLE,
            ),
        ),
        DemoFlow("desk", False, (load_scenario("desk").command,)),
    )


def run_demo(engine: Engine) -> list[Session]:
    """Run every flow to completion and return the finished sessions."""
    sessions = []
    for flow in demo_flows():
        overrides = load_spoken_overrides() if flow.inject_spoken_errors else None
        session = engine.create_session(flow.scenario_id, spoken_overrides=overrides)
        for text in flow.turns:
            session.handle_turn(text)
        sessions.append(session)
    return sessions
