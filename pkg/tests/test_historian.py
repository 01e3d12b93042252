from datetime import datetime, timedelta, timezone

import pytest

from housekeep.domain import UserRequest
from housekeep.gateway import ChatMessage, HashEmbedder
from housekeep.historian import (
    CONTEXT_FOOTER,
    CONTEXT_HEADER,
    EMPTY_CONTEXT_LINE,
    HistorianPromptConfig,
    answer,
    answer_with_full_history,
    build_context_block,
)
from housekeep.memory import DialogueEntry, MemoryStore, ModelMismatch

T0 = datetime(2025, 1, 15, 9, 0, 0, tzinfo=timezone.utc)
EMBEDDER = HashEmbedder()


class EchoBackend:
    """Chat stub that records the prompt and answers with a fixed string."""

    model_id = "echo"

    def __init__(self, text="the answer"):
        self.text = text
        self.transcripts = []

    def chat(self, messages, tools=()):
        self.transcripts.append(list(messages))
        return ChatMessage("assistant", self.text)


def _store(texts):
    store = MemoryStore(model_id=EMBEDDER.model_id)
    entries = [
        DialogueEntry(t, f"answer about {t}", T0 + timedelta(minutes=i), i + 1)
        for i, t in enumerate(texts)
    ]
    store.ingest(entries, EMBEDDER)
    return store


def _request(text):
    return UserRequest(text, "s", datetime.now(timezone.utc))


def test_prompt_config_requires_no_fabrication_clause():
    HistorianPromptConfig("Answer from history. Never invent events.")
    with pytest.raises(ValueError, match="no-fabrication"):
        HistorianPromptConfig("Answer from history.")


def test_build_context_block_layout():
    block = build_context_block(["line one", "line two"], "where is it?")
    assert block.startswith(f"{CONTEXT_HEADER}\nline one\nline two")
    assert CONTEXT_FOOTER in block
    assert block.endswith("Question: where is it?")


def test_build_context_block_empty():
    block = build_context_block([], "where?")
    assert EMPTY_CONTEXT_LINE in block


def test_answer_uses_separate_embedder_and_keeps_provenance(pack):
    store = _store(["jacket location", "banana request", "sink contents"])
    backend = EchoBackend()
    result = answer(_request("jacket location"), 2, store, pack.historian, backend, embedder=EMBEDDER)
    assert result.text == "the answer"
    assert result.retrieval is not None
    assert result.retrieval.k_returned == 2
    assert len(result.evidence) == 2
    assert any("jacket" in text for text in result.evidence)


def test_answer_prompt_lists_chunks_chronologically(pack):
    # query matches the LAST entry hardest; the prompt must still be in id order
    store = _store(["alpha topic", "beta topic", "gamma topic"])
    backend = EchoBackend()
    result = answer(_request("gamma topic"), 3, store, pack.historian, backend, embedder=EMBEDDER)
    assert result.retrieval.chunks[0].chunk.entry.entry_id == 3

    user_prompt = backend.transcripts[0][1].content
    positions = [user_prompt.find(f"Q: {t} ") for t in ("alpha topic", "beta topic", "gamma topic")]
    assert all(p >= 0 for p in positions)
    assert positions == sorted(positions)


def test_answer_on_empty_store_has_no_evidence(pack):
    store = MemoryStore(model_id=EMBEDDER.model_id)
    backend = EchoBackend("nothing happened yet")
    result = answer(_request("what happened?"), 5, store, pack.historian, backend, embedder=EMBEDDER)
    assert result.retrieval is None
    assert result.evidence == ()
    assert EMPTY_CONTEXT_LINE in backend.transcripts[0][1].content


class ComboBackend(EchoBackend):
    """Chat stub that also serves embeddings, like a scripted backend does."""

    model_id = "combo"

    def embed(self, texts):
        return HashEmbedder(self.model_id).embed(texts)


def test_answer_falls_back_to_chat_backend_for_embedding(pack):
    backend = ComboBackend()
    store = MemoryStore(model_id=backend.model_id)
    store.ingest([DialogueEntry("q", "a", T0, 1)], backend)
    result = answer(_request("what was q?"), 1, store, pack.historian, backend)
    assert result.retrieval is not None
    assert result.retrieval.k_returned == 1


def test_answer_propagates_model_mismatch(pack):
    store = _store(["anything"])
    with pytest.raises(ModelMismatch):
        answer(
            _request("anything"),
            1,
            store,
            pack.historian,
            EchoBackend(),
            embedder=HashEmbedder("other-model"),
        )


def test_full_history_ablation_includes_every_chunk(pack):
    store = _store(["first", "second", "third", "fourth"])
    backend = EchoBackend()
    result = answer_with_full_history(_request("what about second?"), store, pack.historian, backend)
    assert result.retrieval is None
    assert result.evidence == ()
    user_prompt = backend.transcripts[0][1].content
    assert user_prompt.count("] Q: ") == 4
