"""Phase runners: task planning, knowledge base validity, and routing.

Each phase repeats its items a configurable number of times (default 5),
accumulates raw counts, and returns an EvalReport whose percentages all
recompute from those counts. Backends are either live HTTP endpoints or
scripted replay files; the harness itself never branches on which.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .. import historian, planner, router
from ..clockutil import RealClock
from ..domain import RouteCategory, UserRequest
from ..gateway import (
    BackendConfig,
    ChatBackend,
    EmbeddingBackend,
    HashEmbedder,
    HttpBackend,
    ScriptedBackend,
    TransportError,
)
from ..memory import MemoryStore
from ..prompts import PromptPack, load_pack
from ..simulator import SCENARIO_IDS, load_scenario
from .fixtures import fixture_digest, load_dialogue, load_questions, load_routing_queries
from .scoring import (
    EvalReport,
    EvalRow,
    KnowledgeQuestion,
    invalid_plan_verdicts,
    mean_cell,
    question_cell,
    ratio_cell,
    score_knowledge,
    score_plan,
)

PHASES = ("task_planning", "knowledge_base", "routing")

# consecutive transport failures on one item before the item is abandoned
TRANSPORT_ABORT_LIMIT = 3


@dataclass(frozen=True)
class ModelSpec:
    """One evaluated model: either a scripted replay file or a live endpoint."""

    name: str
    script: str | None = None
    base_url: str | None = None
    model: str = ""
    supports_tool_calling: bool = True
    temperature: float = 0.0
    max_tokens: int = 1024
    api_key: str = ""
    embed_base_url: str | None = None
    embed_model: str = ""

    def __post_init__(self):
        if bool(self.script) == bool(self.base_url):
            raise ValueError(f"model {self.name!r} needs exactly one of script or base_url")

    @property
    def mode(self) -> str:
        return "scripted" if self.script else "live"


@dataclass
class RunSpec:
    phase: str
    models: list[ModelSpec]
    repetitions: int = 5
    k: int = 5
    include_no_rag: bool = True
    allow_keyword_fallback: bool = False
    fixture_dir: str | None = None
    prompt_pack_dir: str | None = None

    def __post_init__(self):
        if self.phase not in PHASES:
            raise ValueError(f"unknown phase {self.phase!r}; expected one of {PHASES}")
        if self.repetitions <= 0:
            raise ValueError("repetitions must be positive")
        if not self.models:
            raise ValueError("at least one model is required")


def chat_backend_for(spec: ModelSpec) -> ChatBackend:
    if spec.script:
        return ScriptedBackend.from_file(spec.script, model_id=spec.model or spec.name)
    config = BackendConfig(
        base_url=spec.base_url,
        model=spec.model,
        temperature=spec.temperature,
        max_tokens=spec.max_tokens,
        api_key=spec.api_key,
    )
    return HttpBackend(config)


def embedding_backend_for(spec: ModelSpec) -> EmbeddingBackend:
    """Embeddings for the memory store: a live endpoint when configured,
    otherwise the deterministic local hash embedder."""
    if spec.embed_base_url:
        config = BackendConfig(
            base_url=spec.embed_base_url,
            model=spec.embed_model or spec.model,
            api_key=spec.api_key,
        )
        return HttpBackend(config)
    return HashEmbedder()


class _AbortTracker:
    """Abandon an item after too many consecutive transport failures."""

    def __init__(self, limit: int = TRANSPORT_ABORT_LIMIT):
        self.limit = limit
        self.streak = 0

    def ok(self) -> None:
        self.streak = 0

    def failed(self) -> bool:
        self.streak += 1
        return self.streak >= self.limit


@dataclass
class _ModelCounters:
    invalid_runs: int = 0
    retried_runs: int = 0
    transport_failures: int = 0
    aborted_items: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "invalid_runs": self.invalid_runs,
            "retried_runs": self.retried_runs,
            "transport_failures": self.transport_failures,
            "aborted_items": self.aborted_items,
        }


def _base_metadata(spec: RunSpec, pack: PromptPack) -> dict:
    return {
        "phase": spec.phase,
        "repetitions": spec.repetitions,
        "k": spec.k,
        "prompt_pack": pack.version,
        "fixture_digest": fixture_digest(spec.fixture_dir),
        "models": [
            {
                "name": m.name,
                "mode": m.mode,
                "model": m.model or m.name,
                "temperature": m.temperature,
                "max_tokens": m.max_tokens,
                "supports_tool_calling": m.supports_tool_calling,
            }
            for m in spec.models
        ],
    }


def run_phase(spec: RunSpec) -> EvalReport:
    pack = load_pack(spec.prompt_pack_dir) if spec.prompt_pack_dir else load_pack()
    if spec.phase == "task_planning":
        report = _run_task_planning(spec, pack)
    elif spec.phase == "knowledge_base":
        report = _run_knowledge_base(spec, pack)
    else:
        report = _run_routing(spec, pack)
    report.validate()
    return report


def _abort_warning(model: str, item: str) -> str:
    return (
        f"{model}/{item}: abandoned after {TRANSPORT_ABORT_LIMIT} "
        "consecutive transport failures"
    )


# --- task planning ------------------------------------------------------------------

def _run_task_planning(spec: RunSpec, pack: PromptPack) -> EvalReport:
    report = EvalReport("task_planning", _base_metadata(spec, pack))
    counters_by_model: dict[str, dict] = {}
    for model in spec.models:
        backend = chat_backend_for(model)
        counters = _ModelCounters()
        cells: dict = {}
        scenario_strict = []
        scenario_lenient = []
        for sid in SCENARIO_IDS:
            scenario = load_scenario(sid, spec.fixture_dir and Path(spec.fixture_dir) / "scenarios")
            request = UserRequest(scenario.command, session_id="eval", received_at=RealClock().now())
            observations = scenario.observations()
            tracker = _AbortTracker()
            verdicts = []
            reps_done = 0
            while reps_done < spec.repetitions:
                try:
                    run = planner.run_planner(request, observations, pack.planner, backend)
                except planner.PlanningFailed:
                    counters.invalid_runs += 1
                    verdicts.extend(invalid_plan_verdicts(scenario))
                    tracker.ok()
                    reps_done += 1
                    continue
                except TransportError:
                    counters.transport_failures += 1
                    verdicts.extend(invalid_plan_verdicts(scenario))
                    reps_done += 1
                    if tracker.failed():
                        for _ in range(spec.repetitions - reps_done):
                            verdicts.extend(invalid_plan_verdicts(scenario))
                        reps_done = spec.repetitions
                        counters.aborted_items.append(sid)
                        report.warnings.append(_abort_warning(model.name, sid))
                    continue
                if run.retried:
                    counters.retried_runs += 1
                verdicts.extend(score_plan(run.plan, scenario))
                tracker.ok()
                reps_done += 1
            strict = ratio_cell(sum(v.strict for v in verdicts), len(verdicts))
            lenient = ratio_cell(sum(v.lenient for v in verdicts), len(verdicts))
            cells[f"{sid}/strict"] = strict
            cells[f"{sid}/lenient"] = lenient
            scenario_strict.append(strict)
            scenario_lenient.append(lenient)
        cells["total/strict"] = mean_cell(scenario_strict)
        cells["total/lenient"] = mean_cell(scenario_lenient)
        report.rows.append(EvalRow(model.name, None, cells))
        counters_by_model[model.name] = counters.to_dict()
    report.metadata["counters"] = counters_by_model
    return report


# --- knowledge base ------------------------------------------------------------------

def _ask(
    question: KnowledgeQuestion,
    method: str,
    store: MemoryStore,
    spec: RunSpec,
    pack: PromptPack,
    backend: ChatBackend,
    embedder: EmbeddingBackend,
) -> str:
    request = UserRequest(question.question, session_id="eval", received_at=RealClock().now())
    if method == "with_rag":
        return historian.answer(
            request, spec.k, store, pack.historian, backend, embedder=embedder
        ).text
    return historian.answer_with_full_history(request, store, pack.historian, backend).text


def _run_knowledge_base(spec: RunSpec, pack: PromptPack) -> EvalReport:
    report = EvalReport("knowledge_base", _base_metadata(spec, pack))
    dialogue = list(load_dialogue(spec.fixture_dir))
    questions = load_questions(spec.fixture_dir)
    report.metadata["dialogue_entries"] = len(dialogue)
    report.metadata["questions"] = [q.id for q in questions]
    counters_by_model: dict[str, dict] = {}

    methods = ["with_rag"] + (["without_rag"] if spec.include_no_rag else [])
    for model in spec.models:
        backend = chat_backend_for(model)
        embedder = embedding_backend_for(model)
        store = MemoryStore(model_id=embedder.model_id)
        store.ingest(dialogue, embedder)
        counters = _ModelCounters()
        totals_by_method: dict[str, float] = {}
        for method in methods:
            cells: dict = {}
            question_cells = []
            for question in questions:
                tracker = _AbortTracker()
                scores: list[float] = []
                reps_done = 0
                while reps_done < spec.repetitions:
                    try:
                        answer_text = _ask(question, method, store, spec, pack, backend, embedder)
                    except TransportError:
                        counters.transport_failures += 1
                        scores.append(0.0)
                        reps_done += 1
                        if tracker.failed():
                            scores.extend(0.0 for _ in range(spec.repetitions - reps_done))
                            reps_done = spec.repetitions
                            counters.aborted_items.append(f"{method}/{question.id}")
                            report.warnings.append(
                                _abort_warning(model.name, f"{method}/{question.id}")
                            )
                        continue
                    scores.append(score_knowledge(answer_text, question))
                    tracker.ok()
                    reps_done += 1
                cell = question_cell(scores)
                cells[question.id] = cell
                question_cells.append(cell)
            cells["total"] = mean_cell(question_cells)
            totals_by_method[method] = cells["total"].percent
            report.rows.append(EvalRow(model.name, method, cells))
        if "with_rag" in totals_by_method and "without_rag" in totals_by_method:
            with_rag = totals_by_method["with_rag"]
            without = totals_by_method["without_rag"]
            if with_rag <= without:
                report.warnings.append(
                    f"{model.name}: retrieval-augmented validity ({with_rag:.1f}) did not "
                    f"exceed the full-context baseline ({without:.1f}); expected it to"
                )
        counters_by_model[model.name] = counters.to_dict()
    report.metadata["counters"] = counters_by_model
    return report


# --- routing -----------------------------------------------------------------------------

def _run_routing(spec: RunSpec, pack: PromptPack) -> EvalReport:
    report = EvalReport("routing", _base_metadata(spec, pack))
    queries = load_routing_queries(spec.fixture_dir)
    groups = list(dict.fromkeys(q["group"] for q in queries))
    excluded = []
    counters_by_model: dict[str, dict] = {}

    for model in spec.models:
        if not model.supports_tool_calling and not spec.allow_keyword_fallback:
            excluded.append(
                {"name": model.name, "reason": "no tool calling support; fallback disabled"}
            )
            continue
        backend = chat_backend_for(model)
        counters = _ModelCounters()
        correct = {g: 0 for g in groups}
        attempted = {g: 0 for g in groups}
        for query in queries:
            group = query["group"]
            expected = RouteCategory(query["expected"])
            request = UserRequest(query["text"], session_id="eval", received_at=RealClock().now())
            tracker = _AbortTracker()
            reps_done = 0
            while reps_done < spec.repetitions:
                try:
                    decision = router.route(request, pack.router, backend)
                except router.RoutingUndecidable:
                    # counted as an incorrect attempt, not skipped
                    counters.invalid_runs += 1
                    attempted[group] += 1
                    tracker.ok()
                    reps_done += 1
                    continue
                except TransportError:
                    counters.transport_failures += 1
                    attempted[group] += 1
                    reps_done += 1
                    if tracker.failed():
                        attempted[group] += spec.repetitions - reps_done
                        reps_done = spec.repetitions
                        counters.aborted_items.append(query["id"])
                        report.warnings.append(_abort_warning(model.name, query["id"]))
                    continue
                attempted[group] += 1
                if decision.category is expected:
                    correct[group] += 1
                tracker.ok()
                reps_done += 1
        cells = {f"{g}_queries": ratio_cell(correct[g], attempted[g]) for g in groups}
        # the overall routing rate pools all attempts rather than averaging groups
        cells["total"] = ratio_cell(sum(correct.values()), sum(attempted.values()))
        report.rows.append(EvalRow(model.name, None, cells))
        counters_by_model[model.name] = counters.to_dict()

    report.metadata["excluded_models"] = excluded
    report.metadata["counters"] = counters_by_model
    return report
