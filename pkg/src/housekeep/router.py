"""Routing agent: classify each request and pick the specialized agent.

Classification is dual-mode. Preferred: the model answers with one of three
handoff tool calls. Fallback: models without tool calling reply with a single
constrained keyword (ACTION / HISTORY / UNCLEAR) which a parser picks up. The
mode used lands in the decision's provenance.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .domain import RouteCategory, RouteDecision, UserRequest
from .gateway import ChatBackend, ChatMessage, ToolSpec

TOOL_TASK_PLANNER = "transfer_to_task_planner"
TOOL_KNOWLEDGE_BASE = "transfer_to_knowledge_base"
TOOL_CLARIFY = "ask_clarification"

_TOOL_TO_CATEGORY = {
    TOOL_TASK_PLANNER: RouteCategory.ACTION_COMMAND,
    TOOL_KNOWLEDGE_BASE: RouteCategory.HISTORY_QUERY,
    TOOL_CLARIFY: RouteCategory.UNCLEAR,
}

_KEYWORD_TO_CATEGORY = {
    "ACTION": RouteCategory.ACTION_COMMAND,
    "HISTORY": RouteCategory.HISTORY_QUERY,
    "UNCLEAR": RouteCategory.UNCLEAR,
}

_KEYWORD_RE = re.compile(r"\b(ACTION|HISTORY|UNCLEAR)\b")

GENERIC_CLARIFICATION = (
    "I am not sure what you would like me to do. Could you rephrase your request, "
    "either as a task to perform or as a question about past actions?"
)


class RoutingUndecidable(Exception):
    """Neither a handoff tool call nor a fallback keyword was present."""

    def __init__(self, reply: ChatMessage):
        super().__init__(f"routing reply is undecidable: {reply.content[:120]!r}")
        self.reply = reply


@dataclass(frozen=True)
class RouterPromptConfig:
    system_prompt: str
    tools: tuple[ToolSpec, ...]

    def __post_init__(self):
        if len(self.tools) != 3:
            raise ValueError("router needs exactly three handoff tools")
        names = {t.name for t in self.tools}
        if len(names) != 3:
            raise ValueError("router tool names must be unique")
        if names != set(_TOOL_TO_CATEGORY):
            raise ValueError(f"unexpected router tool names: {sorted(names)}")


def route(request: UserRequest, config: RouterPromptConfig, backend: ChatBackend) -> RouteDecision:
    """Classify one request into exactly one category.

    Raises RoutingUndecidable when the backend emitted neither a recognized
    tool call nor a fallback keyword; the orchestrator maps that to an
    unclear decision with a generic clarification prompt.
    """
    messages = [
        ChatMessage("system", config.system_prompt),
        ChatMessage("user", request.text),
    ]
    reply = backend.chat(messages, config.tools)
    return interpret_reply(reply)


def interpret_reply(reply: ChatMessage) -> RouteDecision:
    for call in reply.tool_calls:
        category = _TOOL_TO_CATEGORY.get(call.name)
        if category is None:
            continue
        if category is RouteCategory.UNCLEAR:
            prompt = str(call.arguments.get("question") or "").strip() or GENERIC_CLARIFICATION
            return RouteDecision(category, prompt, provenance="tool_call")
        return RouteDecision(category, provenance="tool_call")

    keywords = set(_KEYWORD_RE.findall(reply.content or ""))
    if len(keywords) == 1:
        category = _KEYWORD_TO_CATEGORY[keywords.pop()]
        if category is RouteCategory.UNCLEAR:
            leftover = _KEYWORD_RE.sub("", reply.content).strip(" .:;,\n")
            return RouteDecision(category, leftover or GENERIC_CLARIFICATION, provenance="keyword_fallback")
        return RouteDecision(category, provenance="keyword_fallback")

    raise RoutingUndecidable(reply)


def undecidable_decision() -> RouteDecision:
    """The orchestrator-facing fallback for RoutingUndecidable."""
    return RouteDecision(
        RouteCategory.UNCLEAR, GENERIC_CLARIFICATION, provenance="undecidable_default"
    )


def score_routing(decisions: list[tuple[RouteCategory, RouteCategory]]) -> float:
    """Success rate percent (one decimal) over (expected, actual) pairs."""
    if not decisions:
        raise ValueError("decisions must be non-empty")
    correct = sum(1 for expected, actual in decisions if expected == actual)
    from .evalharness.scoring import round_percent  # local import avoids a cycle

    return round_percent(100.0 * correct / len(decisions))
