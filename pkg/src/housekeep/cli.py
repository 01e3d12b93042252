"""Command line entry points.

Exit codes: 0 on success, 1 on runtime failure, 2 on usage errors (argparse's
own convention). Evaluation output lands under --out as text, JSON, CSV, and
PNG per phase plus a manifest.json listing everything written.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .evalharness.fixtures import (
    fixture_digest,
    load_dialogue,
    load_questions,
    load_routing_queries,
    load_spoken_overrides,
    script_path,
)
from .evalharness.report import render_text, write_outputs
from .evalharness.runner import ModelSpec, PHASES, RunSpec, run_phase
from .gateway import BackendConfig, HashEmbedder, HttpBackend, ScriptedBackend
from .orchestrator import AgentBackends, Engine
from .prompts import load_pack
from .simulator import SCENARIO_IDS, load_all_scenarios

PHASE_ALIASES = {
    "task": "task_planning",
    "kb": "knowledge_base",
    **{p: p for p in PHASES},
}


class CliError(Exception):
    """User-facing failure: printed to stderr, exit code 1."""


def _http_backend(doc: dict) -> HttpBackend:
    return HttpBackend(
        BackendConfig(
            base_url=doc["base_url"],
            model=doc.get("model", ""),
            temperature=doc.get("temperature", 0.0),
            max_tokens=doc.get("max_tokens", 1024),
            api_key=doc.get("api_key", ""),
        )
    )


def _load_config(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise CliError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise CliError(f"config file is not valid JSON: {exc}") from exc


def _engine_from_args(args) -> Engine:
    """Build the engine either from one scripted file or a per-role config."""
    if args.scripted:
        path = script_path(args.scripted)
        model_id = Path(path).stem.replace("_", "-")

        def factory() -> AgentBackends:
            backend = ScriptedBackend.from_file(path, model_id=model_id)
            return AgentBackends(backend, backend, backend, backend)

        return Engine(factory, deterministic_clock=True, k=args.k)

    if not args.config:
        raise CliError("either --scripted or --config is required")
    doc = _load_config(args.config)
    roles = doc.get("backends")
    if not roles:
        raise CliError('config needs a "backends" object with router/planner/historian')

    def factory() -> AgentBackends:
        embed_doc = roles.get("embedder")
        embedder = _http_backend(embed_doc) if embed_doc else HashEmbedder()
        return AgentBackends(
            router=_http_backend(roles["router"]),
            planner=_http_backend(roles["planner"]),
            historian=_http_backend(roles["historian"]),
            embedder=embedder,
        )

    return Engine(factory, deterministic_clock=bool(args.deterministic), k=args.k)


# --- eval ---------------------------------------------------------------------------

def _eval_models(args) -> list[ModelSpec]:
    if args.scripted:
        models = []
        for name in args.scripted.split(","):
            path = script_path(name.strip())
            models.append(ModelSpec(name=Path(path).stem, script=str(path)))
        return models
    if args.config:
        doc = _load_config(args.config)
        items = doc.get("models")
        if not items:
            raise CliError('config needs a "models" array for eval')
        try:
            return [ModelSpec(**item) for item in items]
        except (TypeError, ValueError) as exc:
            raise CliError(f"bad model entry in config: {exc}") from exc
    raise CliError("either --scripted or --config is required")


def cmd_eval(args) -> int:
    phases = (
        list(PHASES) if args.phase == "all" else [PHASE_ALIASES[args.phase]]
    )
    models = _eval_models(args)
    manifest: dict = {"phases": {}, "fixture_digest": fixture_digest()}
    for phase in phases:
        spec = RunSpec(
            phase=phase,
            models=models,
            repetitions=args.reps,
            k=args.k,
            include_no_rag=not args.no_rag_off,
            allow_keyword_fallback=args.fallback_routing,
        )
        report = run_phase(spec)
        print(render_text(report))
        if args.out:
            paths = write_outputs(report, args.out)
            manifest["phases"][phase] = paths
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "manifest.json").write_text(
            json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
        )
        print(f"outputs written to {out}")
    return 0


# --- chat ----------------------------------------------------------------------------

def cmd_chat(args) -> int:
    engine = _engine_from_args(args)
    overrides = load_spoken_overrides() if args.inject_errors else None
    session = engine.create_session(args.scenario, spoken_overrides=overrides)
    print(f"session {session.session_id} on scenario {args.scenario!r}")
    print("objects:", ", ".join(session.scenario.objects))
    print("commands: /world /history /quit")
    while True:
        try:
            line = input("> ").strip()
        except (EOFError, KeyboardInterrupt):
            print()
            return 0
        if not line:
            continue
        if line == "/quit":
            return 0
        if line == "/world":
            print(json.dumps(session.world.to_dict(), indent=2))
            continue
        if line == "/history":
            for i, turn in enumerate(session.turns, 1):
                print(f"[{i}] {turn.request_text!r} -> {turn.route.category.value}")
            continue
        record = session.handle_turn(line)
        if record.clarification:
            print(f"[clarify] {record.clarification}")
        elif record.narration is not None:
            print(f"[done] {record.narration}")
            if record.error:
                print(f"[error] {record.error}")
        else:
            print(f"[answer] {record.answer}")
            for item in record.retrieval or []:
                print(f"  evidence: {item['rendered_text']}")
    return 0


# --- fixtures ------------------------------------------------------------------------

def cmd_fixtures(args) -> int:
    if args.fixtures_cmd != "validate":
        raise CliError(f"unknown fixtures subcommand {args.fixtures_cmd!r}")
    scenarios = load_all_scenarios()
    for sid, scenario in scenarios.items():
        print(f"scenario {sid}: {len(scenario.objects)} objects")
    dialogue = load_dialogue()
    print(f"dialogue: {len(dialogue)} entries")
    questions = load_questions()
    print(f"questions: {', '.join(q.id for q in questions)}")
    queries = load_routing_queries()
    print(f"routing queries: {len(queries)}")
    overrides = load_spoken_overrides()
    print(f"spoken overrides: {overrides}")
    for name in ("qwen_like", "llama_like"):
        backend = ScriptedBackend.from_file(script_path(name))
        print(f"script {name}: {len(backend._by_message) + len(backend._by_digest)} entries")
    pack = load_pack()
    print(f"prompt pack: {pack.version}")
    print(f"fixture digest: {fixture_digest()}")
    return 0


# --- serve ---------------------------------------------------------------------------

def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    engine = _engine_from_args(args)
    app = create_app(engine, cors_origins=args.cors or None)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="housekeep")
    sub = parser.add_subparsers(dest="command", required=True)

    eval_p = sub.add_parser("eval", help="run an evaluation phase and write reports")
    eval_p.add_argument(
        "--phase",
        choices=sorted(set(PHASE_ALIASES)) + ["all"],
        required=True,
    )
    eval_p.add_argument("--scripted", help="comma-separated scripted replay names or paths")
    eval_p.add_argument("--config", help="JSON config with a models[] array")
    eval_p.add_argument("--reps", type=int, default=5)
    eval_p.add_argument("--k", type=int, default=5)
    eval_p.add_argument(
        "--no-rag-off",
        action="store_true",
        help="skip the without-RAG ablation rows in the knowledge base phase",
    )
    eval_p.add_argument(
        "--fallback-routing",
        action="store_true",
        help="route models without tool calling via plain-text keywords",
    )
    eval_p.add_argument("--out", help="directory for text/JSON/CSV/PNG outputs")
    eval_p.set_defaults(func=cmd_eval)

    chat_p = sub.add_parser("chat", help="interactive session against one scenario")
    chat_p.add_argument("--scenario", choices=SCENARIO_IDS, required=True)
    chat_p.add_argument("--scripted", help="scripted replay name or path")
    chat_p.add_argument("--config", help="JSON config with per-role backends")
    chat_p.add_argument("--k", type=int, default=5)
    chat_p.add_argument("--deterministic", action="store_true")
    chat_p.add_argument(
        "--inject-errors",
        action="store_true",
        help="apply the bundled spoken-report overrides",
    )
    chat_p.set_defaults(func=cmd_chat)

    fx_p = sub.add_parser("fixtures", help="fixture utilities")
    fx_p.add_argument("fixtures_cmd", choices=["validate"])
    fx_p.set_defaults(func=cmd_fixtures)

    serve_p = sub.add_parser("serve", help="run the HTTP service")
    serve_p.add_argument("--host", default="127.0.0.1")
    serve_p.add_argument("--port", type=int, default=8099)
    serve_p.add_argument("--scripted", help="scripted replay name or path")
    serve_p.add_argument("--config", help="JSON config with per-role backends")
    serve_p.add_argument("--k", type=int, default=5)
    serve_p.add_argument("--deterministic", action="store_true")
    serve_p.add_argument("--cors", action="append", help="allowed CORS origin (repeatable)")
    serve_p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
