"""Household agent orchestration: routing, task planning, simulated execution,
timestamped action memory with retrieval, and an evaluation harness."""

from .domain import (
    DESTINATIONS,
    PLACEMENT_DESTINATIONS,
    Destination,
    MoveEvent,
    ObjectObservation,
    RouteCategory,
    RouteDecision,
    TaskPlan,
    TaskStep,
    UserRequest,
    WorldState,
    parse_destination,
    replay,
)
from .gateway import (
    BackendConfig,
    ChatMessage,
    HashEmbedder,
    HttpBackend,
    ScriptedBackend,
    ToolCall,
    ToolSpec,
)
from .memory import DialogueEntry, MemoryStore, RetrievalResult
from .orchestrator import AgentBackends, Engine, Session, TurnRecord
from .prompts import PromptPack, load_pack
from .simulator import SCENARIO_IDS, Scenario, execute, load_scenario

__version__ = "0.1.0"

__all__ = [
    "DESTINATIONS",
    "PLACEMENT_DESTINATIONS",
    "SCENARIO_IDS",
    "AgentBackends",
    "BackendConfig",
    "ChatMessage",
    "DialogueEntry",
    "Destination",
    "Engine",
    "HashEmbedder",
    "HttpBackend",
    "MemoryStore",
    "MoveEvent",
    "ObjectObservation",
    "PromptPack",
    "RetrievalResult",
    "RouteCategory",
    "RouteDecision",
    "Scenario",
    "ScriptedBackend",
    "Session",
    "TaskPlan",
    "TaskStep",
    "ToolCall",
    "ToolSpec",
    "TurnRecord",
    "UserRequest",
    "WorldState",
    "execute",
    "load_pack",
    "load_scenario",
    "parse_destination",
    "replay",
    "__version__",
]
