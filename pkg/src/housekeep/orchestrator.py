"""Session loop: route each request, delegate, execute, then memorize the turn.

Handoff is in-process dispatch on the route decision. Every completed turn
appends exactly one question-answer pair to the session's memory; for action
turns the answer half is the narrated (possibly error-injected) outcome,
because the knowledge base is evaluated on what the agent told the user.
World state and memory mutate only after their stage fully succeeded.
"""

from __future__ import annotations

import itertools
import uuid
from dataclasses import dataclass, field
from typing import Callable

from . import historian, planner, router
from .clockutil import Clock, FixedStepClock, RealClock, to_iso_z
from .domain import RouteCategory, RouteDecision, UserRequest, destination_phrase
from .gateway import ChatBackend, EmbeddingBackend
from .historian import HistorianAnswer
from .memory import DialogueEntry, MemoryStore
from .prompts import PromptPack, load_pack
from .simulator import ExecutionOutcome, Scenario, execute, load_scenario

EventCallback = Callable[[str, dict], None]


@dataclass
class AgentBackends:
    """One chat backend per agent role plus the embedding backend."""

    router: ChatBackend
    planner: ChatBackend
    historian: ChatBackend
    embedder: EmbeddingBackend


@dataclass
class TurnRecord:
    request_text: str
    received_at: str
    route: RouteDecision
    plan: dict | None = None
    answer: str | None = None
    clarification: str | None = None
    narration: str | None = None
    execution: dict | None = None
    retrieval: list[dict] | None = None
    stage_latencies: dict[str, float] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)
    error: str | None = None
    planner_retried: bool = False

    def __post_init__(self):
        populated = [x for x in (self.plan, self.answer, self.clarification) if x is not None]
        if len(populated) != 1:
            raise ValueError("exactly one of plan/answer/clarification must be populated")

    def to_dict(self) -> dict:
        return {
            "request": {"text": self.request_text, "received_at": self.received_at},
            "route": {
                "category": self.route.category.value,
                "clarification_prompt": self.route.clarification_prompt,
                "provenance": self.route.provenance,
            },
            "plan": self.plan,
            "answer": self.answer,
            "clarification": self.clarification,
            "narration": self.narration,
            "execution": self.execution,
            "retrieval": self.retrieval,
            "stage_latencies": self.stage_latencies,
            "warnings": self.warnings,
            "error": self.error,
            "planner_retried": self.planner_retried,
        }


def narrate_outcome(outcome: ExecutionOutcome) -> str:
    """Deterministic one-sentence-per-move narration using the SPOKEN destinations."""
    lines: list[str] = []
    for move in outcome.executed:
        if move.spoken_destination == "user_handover":
            lines.append(f"Handed {move.object} to you.")
        else:
            lines.append(f"Moved {move.object} to {destination_phrase(move.spoken_destination)}.")
    for skip in outcome.skipped:
        lines.append(f"Skipped {skip.object}: {skip.reason}.")
    if not lines:
        return "No actions were performed."
    return " ".join(lines)


class Session:
    """One user session owning a scenario world, its memory, and its history."""

    def __init__(
        self,
        scenario: Scenario,
        backends: AgentBackends,
        pack: PromptPack,
        clock: Clock,
        k: int = 5,
        spoken_overrides: dict[str, str] | None = None,
        session_id: str | None = None,
        on_event: EventCallback | None = None,
    ):
        self.session_id = session_id or uuid.uuid4().hex[:12]
        self.scenario = scenario
        self.backends = backends
        self.pack = pack
        self.clock = clock
        self.k = k
        self.spoken_overrides = dict(spoken_overrides or {})
        self.world = scenario.initial_state()
        self.memory = MemoryStore(model_id=backends.embedder.model_id)
        self.dialogue: list[DialogueEntry] = []
        self.turns: list[TurnRecord] = []
        self._on_event = on_event

    def _emit(self, stage: str, payload: dict) -> None:
        if self._on_event is not None:
            self._on_event(stage, payload)

    def _memorize(self, question: str, answer: str) -> None:
        entry = DialogueEntry(
            question=question,
            answer=answer,
            timestamp=self.clock.now(),
            entry_id=len(self.dialogue) + 1,
        )
        self.memory.ingest([entry], self.backends.embedder)
        self.dialogue.append(entry)

    def handle_turn(self, text: str) -> TurnRecord:
        """Process one request end to end; failures land in the record, not the state."""
        received = self.clock.now()
        request = UserRequest(text=text, session_id=self.session_id, received_at=received)
        latencies: dict[str, float] = {}

        t0 = self.clock.now()
        try:
            decision = router.route(request, self.pack.router, self.backends.router)
        except router.RoutingUndecidable:
            decision = router.undecidable_decision()
        latencies["route"] = (self.clock.now() - t0).total_seconds()
        self._emit("routed", {"category": decision.category.value})

        if decision.category is RouteCategory.ACTION_COMMAND:
            record = self._action_turn(request, decision, latencies)
        elif decision.category is RouteCategory.HISTORY_QUERY:
            record = self._history_turn(request, decision, latencies)
        else:
            record = self._clarification_turn(request, decision, latencies)

        self.turns.append(record)
        self._emit("turn_complete", {"index": len(self.turns)})
        return record

    def _action_turn(
        self, request: UserRequest, decision: RouteDecision, latencies: dict[str, float]
    ) -> TurnRecord:
        observations = self.scenario.observations()
        t0 = self.clock.now()
        try:
            run = planner.run_planner(request, observations, self.pack.planner, self.backends.planner)
        except planner.PlanningFailed as exc:
            latencies["plan"] = (self.clock.now() - t0).total_seconds()
            apology = "I could not produce a valid task plan for that request."
            record = TurnRecord(
                request_text=request.text,
                received_at=to_iso_z(request.received_at),
                route=decision,
                answer=apology,
                stage_latencies=latencies,
                error=str(exc),
            )
            self._memorize(request.text, apology)
            self._emit("memorized", {"entries": len(self.dialogue)})
            return record
        latencies["plan"] = (self.clock.now() - t0).total_seconds()
        self._emit("planned", {"steps": len(run.plan.steps)})

        t0 = self.clock.now()
        outcome = execute(
            run.plan, self.world, at=self.clock.now(), spoken_override=self.spoken_overrides
        )
        latencies["execute"] = (self.clock.now() - t0).total_seconds()
        narration = narrate_outcome(outcome)
        self.world = outcome.state
        self._emit(
            "executed", {"moves": len(outcome.executed), "skipped": len(outcome.skipped)}
        )

        warnings = list(run.warnings)
        if not run.plan.steps:
            warnings.append("empty plan: no observed object matched the request")

        t0 = self.clock.now()
        self._memorize(request.text, narration)
        latencies["memorize"] = (self.clock.now() - t0).total_seconds()
        self._emit("memorized", {"entries": len(self.dialogue)})

        return TurnRecord(
            request_text=request.text,
            received_at=to_iso_z(request.received_at),
            route=decision,
            plan=run.plan.to_schema(),
            narration=narration,
            execution=outcome.to_dict(),
            stage_latencies=latencies,
            warnings=warnings,
            planner_retried=run.retried,
        )

    def _history_turn(
        self, request: UserRequest, decision: RouteDecision, latencies: dict[str, float]
    ) -> TurnRecord:
        t0 = self.clock.now()
        result: HistorianAnswer = historian.answer(
            request,
            self.k,
            self.memory,
            self.pack.historian,
            self.backends.historian,
            embedder=self.backends.embedder,
        )
        latencies["answer"] = (self.clock.now() - t0).total_seconds()
        self._emit("answered", {"evidence": result.retrieval.k_returned if result.retrieval else 0})

        retrieval = None
        if result.retrieval is not None:
            retrieval = [
                {
                    "entry_id": s.chunk.entry.entry_id,
                    "rendered_text": s.chunk.rendered_text,
                    "score": s.score,
                }
                for s in result.retrieval.chunks
            ]

        t0 = self.clock.now()
        self._memorize(request.text, result.text)
        latencies["memorize"] = (self.clock.now() - t0).total_seconds()
        self._emit("memorized", {"entries": len(self.dialogue)})

        return TurnRecord(
            request_text=request.text,
            received_at=to_iso_z(request.received_at),
            route=decision,
            answer=result.text,
            retrieval=retrieval,
            stage_latencies=latencies,
        )

    def _clarification_turn(
        self, request: UserRequest, decision: RouteDecision, latencies: dict[str, float]
    ) -> TurnRecord:
        prompt = decision.clarification_prompt or router.GENERIC_CLARIFICATION
        self._memorize(request.text, prompt)
        self._emit("memorized", {"entries": len(self.dialogue)})
        return TurnRecord(
            request_text=request.text,
            received_at=to_iso_z(request.received_at),
            route=decision,
            clarification=prompt,
            stage_latencies=latencies,
        )


class Engine:
    """Factory wiring scenarios, backends, prompts, and clocks into sessions."""

    def __init__(
        self,
        backends_factory: Callable[[], AgentBackends],
        pack: PromptPack | None = None,
        deterministic_clock: bool = False,
        k: int = 5,
    ):
        self._backends_factory = backends_factory
        self.pack = pack or load_pack()
        self.deterministic_clock = deterministic_clock
        self.k = k
        self._counter = itertools.count(1)

    def probe_backends(self) -> dict[str, bool]:
        """Reachability per role; backends without a probe count as reachable."""
        backends = self._backends_factory()
        probes: dict[str, bool] = {}
        for role in ("router", "planner", "historian", "embedder"):
            backend = getattr(backends, role)
            probe = getattr(backend, "reachable", None)
            probes[role] = bool(probe()) if callable(probe) else True
        return probes

    def create_session(
        self,
        scenario_id: str,
        spoken_overrides: dict[str, str] | None = None,
        on_event: EventCallback | None = None,
    ) -> Session:
        scenario = load_scenario(scenario_id)
        clock: Clock = FixedStepClock() if self.deterministic_clock else RealClock()
        return Session(
            scenario=scenario,
            backends=self._backends_factory(),
            pack=self.pack,
            clock=clock,
            k=self.k,
            spoken_overrides=spoken_overrides,
            session_id=f"s{next(self._counter):04d}",
            on_event=on_event,
        )
