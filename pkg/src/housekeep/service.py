"""HTTP service exposing sessions, turns, world state, events, and eval runs.

Error bodies are always ``{"error": {"code", "message", "correlation_id"}}``.
A session processes one turn at a time; a second concurrent turn gets 409
rather than queueing, so clients never wait behind each other's model calls.
The event feed is a replayable log: SSE streams everything after the given
offset and closes, and EventSource reconnects resume via Last-Event-ID.
"""

from __future__ import annotations

import itertools
import json
import threading
import uuid
from dataclasses import dataclass, field as dataclass_field

from fastapi import FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, StreamingResponse
from pydantic import BaseModel, Field

from .evalharness.fixtures import script_path
from .evalharness.runner import ModelSpec, PHASES, RunSpec, run_phase
from .gateway import GatewayError
from .orchestrator import Engine, Session
from .simulator import SCENARIO_IDS, UnknownScenario, load_scenario


class ApiException(Exception):
    def __init__(self, status_code: int, code: str, message: str):
        super().__init__(message)
        self.status_code = status_code
        self.code = code
        self.message = message


def _error_body(code: str, message: str) -> dict:
    return {"error": {"code": code, "message": message, "correlation_id": uuid.uuid4().hex[:12]}}


# --- request / response shapes --------------------------------------------------

class CreateSessionRequest(BaseModel):
    scenario: str
    spoken_overrides: dict[str, str] | None = None


class TurnRequest(BaseModel):
    text: str = Field(min_length=1)


class EvalModelRequest(BaseModel):
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


class EvalRunRequest(BaseModel):
    phase: str
    models: list[EvalModelRequest]
    repetitions: int = 5
    k: int = 5
    include_no_rag: bool = True
    allow_keyword_fallback: bool = False
    out_dir: str | None = None


# --- in-memory registries --------------------------------------------------------

@dataclass
class SessionHandle:
    session: Session
    lock: threading.Lock = dataclass_field(default_factory=threading.Lock)
    events: list[dict] = dataclass_field(default_factory=list)

    def record_event(self, stage: str, data: dict) -> None:
        self.events.append({"seq": len(self.events) + 1, "stage": stage, "data": data})


@dataclass
class EvalRunHandle:
    run_id: str
    request: dict
    status: str = "running"  # running | completed | failed
    report: dict | None = None
    outputs: dict | None = None
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "status": self.status,
            "request": self.request,
            "report": self.report,
            "outputs": self.outputs,
            "error": self.error,
        }


def _model_spec(req: EvalModelRequest) -> ModelSpec:
    script = str(script_path(req.script)) if req.script else None
    return ModelSpec(
        name=req.name,
        script=script,
        base_url=req.base_url,
        model=req.model,
        supports_tool_calling=req.supports_tool_calling,
        temperature=req.temperature,
        max_tokens=req.max_tokens,
        api_key=req.api_key,
        embed_base_url=req.embed_base_url,
        embed_model=req.embed_model,
    )


def create_app(engine: Engine, cors_origins: list[str] | None = None) -> FastAPI:
    app = FastAPI(title="housekeep", docs_url=None, redoc_url=None)
    if cors_origins:
        app.add_middleware(
            CORSMiddleware,
            allow_origins=cors_origins,
            allow_methods=["*"],
            allow_headers=["*"],
        )

    sessions: dict[str, SessionHandle] = {}
    eval_runs: dict[str, EvalRunHandle] = {}
    run_counter = itertools.count(1)
    registry_lock = threading.Lock()

    @app.exception_handler(ApiException)
    async def _api_exception(request: Request, exc: ApiException):
        return JSONResponse(status_code=exc.status_code, content=_error_body(exc.code, exc.message))

    @app.exception_handler(RequestValidationError)
    async def _validation_exception(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=422, content=_error_body("invalid_request", str(exc)))

    def _handle(session_id: str) -> SessionHandle:
        handle = sessions.get(session_id)
        if handle is None:
            raise ApiException(404, "unknown_session", f"no session {session_id!r}")
        return handle

    # --- sessions ---------------------------------------------------------------

    @app.get("/v1/scenarios")
    def list_scenarios():
        items = []
        for sid in SCENARIO_IDS:
            scenario = load_scenario(sid)
            items.append(
                {
                    "id": sid,
                    "cleanup_zone": scenario.cleanup_zone,
                    "command": scenario.command,
                    "objects": list(scenario.objects),
                }
            )
        return {"scenarios": items}

    @app.post("/v1/sessions", status_code=201)
    def create_session(body: CreateSessionRequest):
        holder: dict = {}

        def on_event(stage: str, data: dict) -> None:
            holder["handle"].record_event(stage, data)

        try:
            session = engine.create_session(
                body.scenario, spoken_overrides=body.spoken_overrides, on_event=on_event
            )
        except UnknownScenario as exc:
            raise ApiException(404, "unknown_scenario", f"no scenario {exc.args[0]!r}") from exc
        handle = SessionHandle(session)
        holder["handle"] = handle
        with registry_lock:
            sessions[session.session_id] = handle
        return {
            "session_id": session.session_id,
            "scenario": session.scenario.id,
            "objects": list(session.scenario.objects),
            "k": session.k,
        }

    @app.post("/v1/sessions/{session_id}/turns")
    def post_turn(session_id: str, body: TurnRequest):
        handle = _handle(session_id)
        if not handle.lock.acquire(blocking=False):
            raise ApiException(409, "session_busy", "a turn is already in progress")
        try:
            record = handle.session.handle_turn(body.text)
        except GatewayError as exc:
            raise ApiException(502, "backend_error", str(exc)) from exc
        finally:
            handle.lock.release()
        return {"turn_index": len(handle.session.turns), "record": record.to_dict()}

    @app.get("/v1/sessions/{session_id}/world")
    def get_world(session_id: str):
        handle = _handle(session_id)
        return {
            "session_id": session_id,
            "scenario": handle.session.scenario.id,
            "world": handle.session.world.to_dict(),
        }

    @app.get("/v1/sessions/{session_id}/history")
    def get_history(session_id: str):
        handle = _handle(session_id)
        return {
            "session_id": session_id,
            "turns": [t.to_dict() for t in handle.session.turns],
        }

    @app.get("/v1/sessions/{session_id}/events")
    def get_events(session_id: str, request: Request, after: int = Query(0, ge=0)):
        handle = _handle(session_id)
        last_id = request.headers.get("last-event-id")
        if last_id and last_id.isdigit():
            after = max(after, int(last_id))
        backlog = [e for e in handle.events if e["seq"] > after]

        def stream():
            for event in backlog:
                payload = json.dumps(event["data"], separators=(",", ":"))
                yield f"id: {event['seq']}\nevent: {event['stage']}\ndata: {payload}\n\n"

        return StreamingResponse(stream(), media_type="text/event-stream")

    # --- eval runs ---------------------------------------------------------------

    def _execute_run(handle: EvalRunHandle, spec: RunSpec, out_dir: str | None) -> None:
        try:
            report = run_phase(spec)
            handle.report = report.to_dict()
            if out_dir:
                from .evalharness.report import write_outputs

                handle.outputs = write_outputs(report, out_dir)
            handle.status = "completed"
        except Exception as exc:  # failures land in the run record for the client
            handle.error = f"{type(exc).__name__}: {exc}"
            handle.status = "failed"

    @app.post("/v1/eval/runs", status_code=202)
    def create_eval_run(body: EvalRunRequest):
        if body.phase not in PHASES:
            raise ApiException(422, "invalid_request", f"unknown phase {body.phase!r}")
        try:
            spec = RunSpec(
                phase=body.phase,
                models=[_model_spec(m) for m in body.models],
                repetitions=body.repetitions,
                k=body.k,
                include_no_rag=body.include_no_rag,
                allow_keyword_fallback=body.allow_keyword_fallback,
            )
        except ValueError as exc:
            raise ApiException(422, "invalid_request", str(exc)) from exc
        with registry_lock:
            run_id = f"r{next(run_counter):04d}"
            handle = EvalRunHandle(run_id, body.model_dump())
            eval_runs[run_id] = handle
        thread = threading.Thread(
            target=_execute_run, args=(handle, spec, body.out_dir), daemon=True
        )
        thread.start()
        return {"run_id": run_id, "status": handle.status}

    @app.get("/v1/eval/runs/{run_id}")
    def get_eval_run(run_id: str):
        handle = eval_runs.get(run_id)
        if handle is None:
            raise ApiException(404, "unknown_run", f"no eval run {run_id!r}")
        return handle.to_dict()

    # --- health -------------------------------------------------------------------

    @app.get("/healthz")
    def healthz():
        backends = engine.probe_backends()
        healthy = all(backends.values())
        body = {"status": "ok" if healthy else "degraded", "backends": backends}
        if not healthy:
            return JSONResponse(status_code=503, content=body)
        return body

    return app
