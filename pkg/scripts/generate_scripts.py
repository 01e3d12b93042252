#!/usr/bin/env python3
"""Regenerate the bundled scripted-replay files.

Drives the real router/planner/historian code paths with authored reply
tables and records every chat exchange, so the produced scripts match the
exact prompts the engine builds. Run from the repository root:

    python3 scripts/generate_scripts.py

Rewrites src/housekeep/fixtures/scripts/{qwen_like,llama_like}.json.
"""

from __future__ import annotations

import json
from pathlib import Path

from housekeep import historian, planner, router
from housekeep.clockutil import FixedStepClock
from housekeep.domain import UserRequest
from housekeep.demoflow import CLARIFY_MUMBLE, demo_flows
from housekeep.evalharness.fixtures import (
    load_dialogue,
    load_questions,
    load_routing_queries,
    load_spoken_overrides,
)
from housekeep.gateway import ChatMessage, HashEmbedder, ToolCall
from housekeep.memory import MemoryStore
from housekeep.orchestrator import AgentBackends, Session
from housekeep.prompts import load_pack
from housekeep.simulator import load_scenario

OUT_DIR = Path(__file__).resolve().parent.parent / "src" / "housekeep" / "fixtures" / "scripts"

PACK = load_pack()

CLARIFY_QUESTION = "Could you tell me which items and which spot you mean?"


def plan_reply(reasoning: str, tasks: list[dict]) -> str:
    doc = json.dumps({"tasks": tasks}, ensure_ascii=False)
    return f"{reasoning}\n\n```json\n{doc}\n```"


def task(objects: list[str], destination: str) -> dict:
    return {"objects": objects, "destination": destination}


class RecordingBackend:
    """Chat backend that answers from authored tables and records the script.

    Keys on the exact last user message, the same clause the replay backend
    matches on; a key seen twice must map to the same reply.
    """

    def __init__(self, model_id: str, reply_fn):
        self.model_id = model_id
        self._reply_fn = reply_fn
        self._embedder = HashEmbedder()
        self.entries: list[dict] = []
        self._seen: dict[str, str] = {}

    def chat(self, messages, tools=()):
        key = messages[-1].content
        if messages[-1].role != "user":
            raise AssertionError("recorder expects the last message to be the user's")
        reply = self._reply_fn(messages)
        serialized = json.dumps(reply, sort_keys=True)
        if key in self._seen:
            if self._seen[key] != serialized:
                raise AssertionError(f"conflicting replies for user message: {key[:80]!r}")
        else:
            self._seen[key] = serialized
            self.entries.append({"match": {"last_user_message": key}, "reply": reply})
        calls = tuple(
            ToolCall(c["name"], c.get("arguments") or {}) for c in reply.get("tool_calls") or []
        )
        return ChatMessage("assistant", reply.get("content") or "", calls)

    def embed(self, texts):
        return self._embedder.embed(texts)

    def reachable(self):
        return True


# --- authored router behavior ------------------------------------------------------

def make_router_table(misroute_banana: bool) -> dict[str, dict]:
    table: dict[str, dict] = {}
    for query in load_routing_queries():
        tool = (
            router.TOOL_TASK_PLANNER
            if query["expected"] == "action_command"
            else router.TOOL_KNOWLEDGE_BASE
        )
        if misroute_banana and query["id"] == "cmd_banana":
            tool = router.TOOL_KNOWLEDGE_BASE
        table[query["text"]] = {
            "content": "",
            "tool_calls": [{"id": "call_1", "name": tool, "arguments": {}}],
        }
    table[CLARIFY_MUMBLE] = {
        "content": "",
        "tool_calls": [
            {
                "id": "call_1",
                "name": router.TOOL_CLARIFY,
                "arguments": {"question": CLARIFY_QUESTION},
            }
        ],
    }
    return table


# --- authored plans -------------------------------------------------------------------

QWEN_PLANS = {
    "dining_table": plan_reply(
        "The plate, fork, spoon, glass, frying pan and spatula are used dishware, "
        "so they go to the sink for washing. The pepper grinder is seasoning stock "
        "for the food shelf. I will stow the salt shaker in the storage box. The "
        "chair and the table top are furniture and stay put.",
        [
            task(["Plate", "Fork", "Spoon", "Glass", "Frying pan", "Spatula"], "sink"),
            task(["Pepper grinder"], "food_shelf"),
            task(["Salt shaker"], "storage_box"),
        ],
    ),
    "living_room": plan_reply(
        "The user asked for the brush directly, so it is a handover. The scissors, "
        "pen, book and markers are loose items for the storage box. The salt packet "
        "is opened waste, and the jacket looks ready for disposal too, so both go "
        "to the trash can. The table and the couch are furniture and stay.",
        [
            task(["A brush"], "user_handover"),
            task(["Scissors", "Pen", "Book", "Markers"], "storage_box"),
            task(["Salt packet", "Jacket"], "trash_can"),
        ],
    ),
    "desk": plan_reply(
        "Dishware first: the plate, the cup and the glass of water go to the sink. "
        "The crumbs are waste for the trash can, and the bag of chips is stale so "
        "it joins them. The lemon keeps best in the fridge. The piece of paper "
        "might still matter, so it goes to the storage box, and I will also tuck "
        "the potted plant into the storage box to clear space. The work essentials "
        "stay: desk, monitor, laptop, mouse and cord.",
        [
            task(["Plate", "Cup", "Glass of water"], "sink"),
            task(["Crumbs", "Bag of chips"], "trash_can"),
            task(["Lemon"], "fridge"),
            task(["Piece of paper", "Potted plant"], "storage_box"),
        ],
    ),
}

QWEN_BANANA = plan_reply(
    "I do not see a banana among the observed objects, so there is nothing to fetch.",
    [],
)

LLAMA_PLANS = {
    "dining_table": plan_reply(
        "The plate, fork and spoon are dirty and belong in the sink. The glass, "
        "frying pan and spatula I will put away in the storage box. The salt "
        "shaker can go to the storage box as well, while the pepper grinder "
        "returns to the food shelf.",
        [
            task(["Plate", "Fork", "Spoon"], "sink"),
            task(["Glass", "Frying pan", "Spatula", "Salt shaker"], "storage_box"),
            task(["Pepper grinder"], "food_shelf"),
        ],
    ),
    "desk": plan_reply(
        "The plate, cup and glass of water go to the sink. The crumbs and the "
        "stale bag of chips go to the trash can. The lemon goes to the food "
        "shelf. The piece of paper and the laptop go into the storage box so the "
        "desk is completely clear.",
        [
            task(["Plate", "Cup", "Glass of water"], "sink"),
            task(["Crumbs", "Bag of chips"], "trash_can"),
            task(["Lemon"], "food_shelf"),
            task(["Piece of paper", "Laptop"], "storage_box"),
        ],
    ),
}

LLAMA_LIVING_PROSE = (
    "Happy to help tidy the living room! I would start by handing you the brush, "
    "then gather the scattered items like the scissors, the pen and the markers "
    "into the storage box, and deal with the waste. Let me know if you want me "
    "to proceed with this arrangement."
)

LLAMA_LIVING_RETRY = plan_reply(
    "Here is the plan as JSON only.",
    [
        task(["A brush", "Scissors", "Pen", "Markers"], "storage_box"),
        task(["Salt packet", "Jacket"], "trash_can"),
    ],
)


# --- authored historian answers ----------------------------------------------------

# keyed by (question text, context mode); mode is "rag" for retrieved context,
# "full" for the whole-dialogue ablation, "session" for live-session memory
QWEN_ANSWERS = {
    (
        "Where is the jacket that was in the living room? I thought you put it in the "
        "storage box, but I can't find it there.",
        "rag",
    ): (
        "I checked my records, and the audit entry is decisive: the jacket is in the "
        "trash can, not the storage box. I misreported it at the time. Please look in "
        "the trash can before the waste goes out."
    ),
    (
        "Where is the jacket that was in the living room? I thought you put it in the "
        "storage box, but I can't find it there.",
        "full",
    ): (
        "Going over the whole morning, I reported placing the jacket in the storage box "
        "while tidying the living room, so it should be in the storage box with the "
        "stationery."
    ),
    ("Where did you put the laptop? It's not on the desk anymore.", "rag"): (
        "I never moved the laptop. My log shows I deliberately left it in place with the "
        "monitor, mouse and cord when clearing the desk. If it is gone, someone else "
        "took it."
    ),
    ("Where did you put the laptop? It's not on the desk anymore.", "full"): (
        "I did not move the laptop at any point today; my desk-clearing log lists it "
        "among the work essentials I left untouched."
    ),
    ("I'm getting hungry. Is there any food left around from earlier?", "rag"): (
        "Yes. The lemon and the apple are in the fridge, and the salt shaker and the "
        "pepper grinder are on the food shelf. That is everything edible I have handled "
        "today."
    ),
    ("I'm getting hungry. Is there any food left around from earlier?", "full"): (
        "There is the lemon I put in the fridge and the apple sitting next to it. That "
        "is what I remember placing."
    ),
    ("How many objects are in the trash can?", "rag"): (
        "Four objects: the salt packet, the jacket, the crumbs, and the bag of chips."
    ),
    ("How many objects are in the trash can?", "full"): (
        "Three objects as far as I recall: the salt packet, the crumbs, and the bag of "
        "chips."
    ),
}

# live-session answers, keyed by (scenario the session runs, question text)
QWEN_SESSION_ANSWERS = {
    (
        "living_room",
        "Where is the jacket that was in the living room? I thought you put it in the "
        "storage box, but I can't find it there.",
    ): (
        "My log from this morning says I put the jacket in the storage box after "
        "clearing the living room. If it is not there, something is off; I can run an "
        "audit of my placements if you like."
    ),
    (
        "living_room",
        "Where did you put the laptop? It's not on the desk anymore.",
    ): (
        "I have not moved any laptop. Nothing by that name came up while I was tidying "
        "the living room, so my records show no laptop at all."
    ),
    (
        "living_room",
        "I'm getting hungry. Is there any food left around from earlier?",
    ): (
        "I have not set any food aside here. The only food-related item I handled was "
        "the salt packet, which was empty and went to the trash can."
    ),
    (
        "living_room",
        "How many objects are in the trash can?",
    ): (
        "One that I know of: the salt packet, which I threw away while tidying the "
        "living room."
    ),
    (
        "dining_table",
        "How many objects are in the trash can?",
    ): (
        "Nothing has gone into the trash can in this session. The dishes went to the "
        "sink, the pepper grinder to the food shelf, and the salt shaker to the "
        "storage box."
    ),
}

LLAMA_ANSWERS = {
    (
        "Where is the jacket that was in the living room? I thought you put it in the "
        "storage box, but I can't find it there.",
        "rag",
    ): (
        "The jacket turned up in the trash can according to my audit. Please check the "
        "trash can."
    ),
    (
        "Where is the jacket that was in the living room? I thought you put it in the "
        "storage box, but I can't find it there.",
        "full",
    ): "The jacket is in the storage box, where I put it while tidying the living room.",
    ("Where did you put the laptop? It's not on the desk anymore.", "rag"): (
        "I believe I put the laptop in the storage box while clearing your desk."
    ),
    ("Where did you put the laptop? It's not on the desk anymore.", "full"): (
        "I moved the laptop to the storage box with the paperwork."
    ),
    ("I'm getting hungry. Is there any food left around from earlier?", "rag"): (
        "You have the lemon in the fridge and the apple beside it, plus the salt shaker "
        "on the food shelf."
    ),
    ("I'm getting hungry. Is there any food left around from earlier?", "full"): (
        "There is an apple in the fridge, and a lemon."
    ),
    ("How many objects are in the trash can?", "rag"): (
        "Four things: the salt packet, the jacket, the crumbs, and the bag of chips."
    ),
    ("How many objects are in the trash can?", "full"): (
        "I recall the salt packet and the crumbs in the trash can."
    ),
}


def make_reply_fn(router_table, plans, answers, session_answers, living_prose=None):
    def reply_fn(messages):
        system = messages[0].content
        user = messages[-1].content
        if system == PACK.router.system_prompt:
            if user not in router_table:
                raise AssertionError(f"no authored route for {user!r}")
            return router_table[user]
        if system == PACK.planner.system_prompt:
            return planner_reply(user)
        if system == PACK.historian.system_prompt:
            return historian_reply(user)
        raise AssertionError("unrecognized system prompt")

    def planner_reply(user):
        retried = user.endswith(planner.CORRECTIVE_SUFFIX)
        for sid in ("dining_table", "living_room", "desk"):
            command = load_scenario(sid).command
            if f"Request: {command}" in user:
                if sid == "living_room" and living_prose is not None:
                    content = LLAMA_LIVING_RETRY if retried else living_prose
                else:
                    content = plans[sid]
                return {"content": content, "tool_calls": None}
        if "Can I have a banana?" in user:
            return {"content": QWEN_BANANA, "tool_calls": None}
        raise AssertionError(f"no authored plan for {user[:80]!r}")

    def historian_reply(user):
        question = user.rsplit("Question: ", 1)[1]
        if "[2025-03-01" in user:
            # live-session context; the first turn's command identifies the scenario
            for sid in ("dining_table", "living_room", "desk"):
                if f"Q: {load_scenario(sid).command}" in user:
                    return {"content": session_answers[(sid, question)], "tool_calls": None}
            raise AssertionError(f"cannot identify the session scenario for {question!r}")
        mode = "full" if user.count("] Q: ") >= 21 else "rag"
        return {"content": answers[(question, mode)], "tool_calls": None}

    return reply_fn


# --- drive the real code paths -----------------------------------------------------

def drive_eval_phases(backend) -> None:
    for query in load_routing_queries():
        request = UserRequest(query["text"], session_id="gen", received_at=FixedStepClock().now())
        router.route(request, PACK.router, backend)

    for sid in ("dining_table", "living_room", "desk"):
        scenario = load_scenario(sid)
        request = UserRequest(scenario.command, session_id="gen", received_at=FixedStepClock().now())
        planner.run_planner(request, scenario.observations(), PACK.planner, backend)

    store = MemoryStore(model_id=backend.model_id)
    store.ingest(list(load_dialogue()), backend)
    for question in load_questions():
        request = UserRequest(question.question, session_id="gen", received_at=FixedStepClock().now())
        historian.answer(request, 5, store, PACK.historian, backend)
        historian.answer_with_full_history(request, store, PACK.historian, backend)


def drive_sessions(backend) -> None:
    backends = AgentBackends(backend, backend, backend, backend)
    for flow in demo_flows():
        session = Session(
            scenario=load_scenario(flow.scenario_id),
            backends=backends,
            pack=PACK,
            clock=FixedStepClock(),
            spoken_overrides=load_spoken_overrides() if flow.inject_spoken_errors else None,
            session_id=f"gen-{flow.scenario_id}",
        )
        for text in flow.turns:
            session.handle_turn(text)


def main() -> None:
    OUT_DIR.mkdir(parents=True, exist_ok=True)

    qwen = RecordingBackend(
        "qwen-like",
        make_reply_fn(
            make_router_table(misroute_banana=False),
            QWEN_PLANS,
            QWEN_ANSWERS,
            QWEN_SESSION_ANSWERS,
        ),
    )
    drive_eval_phases(qwen)
    drive_sessions(qwen)
    (OUT_DIR / "qwen_like.json").write_text(
        json.dumps(qwen.entries, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )
    print(f"qwen_like.json: {len(qwen.entries)} entries")

    llama = RecordingBackend(
        "llama-like",
        make_reply_fn(
            make_router_table(misroute_banana=True),
            LLAMA_PLANS,
            LLAMA_ANSWERS,
            session_answers={},
            living_prose=LLAMA_LIVING_PROSE,
        ),
    )
    drive_eval_phases(llama)
    (OUT_DIR / "llama_like.json").write_text(
        json.dumps(llama.entries, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )
    print(f"llama_like.json: {len(llama.entries)} entries")


if __name__ == "__main__":
    main()
