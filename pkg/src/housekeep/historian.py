"""Knowledge base agent: answer questions about past actions from retrieved history.

The context block lists chunks chronologically, one per line in the stored
rendering, so the model can reconcile contradictions by recency. Answers are
free text; the retrieved chunks travel alongside the answer as provenance.
"""

from __future__ import annotations

from dataclasses import dataclass

from .domain import UserRequest
from .gateway import ChatBackend, ChatMessage, EmbeddingBackend
from .memory import EmptyStore, MemoryStore, RetrievalResult

NO_FABRICATION_MARKER = "never invent"

CONTEXT_HEADER = "Known history:"
CONTEXT_FOOTER = "Answer using only the history above."
EMPTY_CONTEXT_LINE = "(no history recorded yet)"


@dataclass(frozen=True)
class HistorianPromptConfig:
    system_prompt: str

    def __post_init__(self):
        if NO_FABRICATION_MARKER not in self.system_prompt.casefold():
            raise ValueError(
                "historian prompt must carry an explicit no-fabrication instruction "
                f"(expected the phrase {NO_FABRICATION_MARKER!r})"
            )


@dataclass(frozen=True)
class HistorianAnswer:
    text: str
    retrieval: RetrievalResult | None  # None when the store was empty

    @property
    def evidence(self) -> tuple[str, ...]:
        if self.retrieval is None:
            return ()
        return tuple(s.chunk.rendered_text for s in self.retrieval.chunks)


def build_context_block(rendered_chunks: list[str], question: str) -> str:
    body = "\n".join(rendered_chunks) if rendered_chunks else EMPTY_CONTEXT_LINE
    return f"{CONTEXT_HEADER}\n{body}\n\n{CONTEXT_FOOTER}\nQuestion: {question}"


def answer(
    query: UserRequest,
    k: int,
    store: MemoryStore,
    config: HistorianPromptConfig,
    backend: ChatBackend,
    embedder: EmbeddingBackend | None = None,
) -> HistorianAnswer:
    """Retrieve top-k chunks, ask the model, and return answer plus provenance.

    The query is embedded with ``embedder`` when given (chat and embedding are
    usually different servers), falling back to the chat backend for backends
    that serve both. On an empty store the model is asked over an empty
    context stating that no history exists; the provenance is then empty.
    """
    retrieval: RetrievalResult | None
    try:
        retrieval = store.retrieve(query.text, k, embedder if embedder is not None else backend)
    except EmptyStore:
        retrieval = None

    if retrieval is None:
        rendered: list[str] = []
    else:
        # chronological order for the prompt; scores stay attached in provenance
        rendered = [
            s.chunk.rendered_text
            for s in sorted(retrieval.chunks, key=lambda s: s.chunk.entry.entry_id)
        ]
    messages = [
        ChatMessage("system", config.system_prompt),
        ChatMessage("user", build_context_block(rendered, query.text)),
    ]
    reply = backend.chat(messages)
    return HistorianAnswer(reply.content, retrieval)


def answer_with_full_history(
    query: UserRequest,
    store: MemoryStore,
    config: HistorianPromptConfig,
    backend: ChatBackend,
) -> HistorianAnswer:
    """Ablation path: stuff the entire dialogue into the context, no retrieval."""
    rendered = [c.rendered_text for c in store.chunks]
    messages = [
        ChatMessage("system", config.system_prompt),
        ChatMessage("user", build_context_block(rendered, query.text)),
    ]
    reply = backend.chat(messages)
    return HistorianAnswer(reply.content, None)
