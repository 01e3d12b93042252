import threading
from datetime import datetime, timedelta, timezone

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from housekeep.gateway import HashEmbedder
from housekeep.memory import (
    DialogueEntry,
    DuplicateEntry,
    EmptyStore,
    MemoryStore,
    ModelMismatch,
    render_chunk,
)
from oracles import brute_force_top_k

T0 = datetime(2025, 1, 15, 9, 0, 0, tzinfo=timezone.utc)
EMBEDDER = HashEmbedder()


def entry(i: int, question: str, answer: str, minutes: int | None = None) -> DialogueEntry:
    offset = timedelta(minutes=i if minutes is None else minutes)
    return DialogueEntry(question, answer, T0 + offset, i)


def fresh_store() -> MemoryStore:
    return MemoryStore(model_id=EMBEDDER.model_id)


def test_render_chunk_format():
    rendered = render_chunk(entry(1, "Where is the plate?", "In the sink."))
    assert rendered == "[2025-01-15T09:01:00Z] Q: Where is the plate? A: In the sink."


def test_dialogue_entry_rejects_blank_fields():
    with pytest.raises(ValueError):
        DialogueEntry(" ", "a", T0, 1)
    with pytest.raises(ValueError):
        DialogueEntry("q", "", T0, 1)


def test_ingest_and_snapshot():
    store = fresh_store()
    assert len(store) == 0
    assert store.next_entry_id() == 1
    store.ingest([entry(1, "q1", "a1"), entry(2, "q2", "a2")], EMBEDDER)
    assert len(store) == 2
    assert store.next_entry_id() == 3
    assert [c.entry.entry_id for c in store.chunks] == [1, 2]
    store.ingest([], EMBEDDER)
    assert len(store) == 2


def test_ingest_rejects_duplicate_entry_id():
    store = fresh_store()
    store.ingest([entry(1, "q", "a")], EMBEDDER)
    with pytest.raises(DuplicateEntry):
        store.ingest([entry(1, "q again", "a again")], EMBEDDER)


def test_ingest_rejects_id_order_against_time_order():
    store = fresh_store()
    store.ingest([entry(1, "q", "a", minutes=10)], EMBEDDER)
    with pytest.raises(ValueError, match="timestamped before"):
        store.ingest([entry(2, "q2", "a2", minutes=5)], EMBEDDER)


def test_ingest_rejects_model_mismatch():
    store = fresh_store()
    with pytest.raises(ModelMismatch):
        store.ingest([entry(1, "q", "a")], HashEmbedder("other-model"))


def test_chunks_snapshot_is_copy_on_write():
    store = fresh_store()
    store.ingest([entry(1, "q", "a")], EMBEDDER)
    before = store.chunks
    store.ingest([entry(2, "q2", "a2")], EMBEDDER)
    assert len(before) == 1
    assert len(store.chunks) == 2


def test_retrieve_preconditions():
    store = fresh_store()
    with pytest.raises(EmptyStore):
        store.retrieve("anything", 5, EMBEDDER)
    store.ingest([entry(1, "q", "a")], EMBEDDER)
    with pytest.raises(ValueError):
        store.retrieve("anything", 0, EMBEDDER)
    with pytest.raises(ModelMismatch):
        store.retrieve("anything", 1, HashEmbedder("other-model"))


def test_retrieve_caps_k_at_store_size():
    store = fresh_store()
    store.ingest([entry(1, "salt packet", "trash"), entry(2, "apple", "fridge")], EMBEDDER)
    result = store.retrieve("apple", 10, EMBEDDER)
    assert result.k_requested == 10
    assert result.k_returned == 2


def test_retrieve_finds_verbatim_match_first():
    store = fresh_store()
    store.ingest(
        [
            entry(1, "Where did you put the jacket?", "In the storage box."),
            entry(2, "Can I have a banana?", "There is no banana."),
            entry(3, "What is in the sink?", "Ten dishes."),
        ],
        EMBEDDER,
    )
    result = store.retrieve("Where did you put the jacket?", 3, EMBEDDER)
    assert result.chunks[0].chunk.entry.entry_id == 1
    assert result.chunks[0].score > max(s.score for s in result.chunks[1:])


def test_retrieve_breaks_score_ties_toward_recent_entries():
    store = fresh_store()
    # identical text and timestamp -> identical vectors -> exact tie
    store.ingest(
        [
            DialogueEntry("same question", "same answer", T0, 1),
            DialogueEntry("same question", "same answer", T0, 2),
            DialogueEntry("unrelated topic entirely", "yes", T0, 3),
        ],
        EMBEDDER,
    )
    result = store.retrieve("same question", 2, EMBEDDER)
    assert [s.chunk.entry.entry_id for s in result.chunks] == [2, 1]
    assert result.chunks[0].score == result.chunks[1].score


@settings(max_examples=30, deadline=None)
@given(
    texts=st.lists(
        st.text(alphabet="abcdefg hij", min_size=1, max_size=30).filter(str.strip),
        min_size=1,
        max_size=25,
    ),
    query=st.text(alphabet="abcdefg hij", min_size=1, max_size=30).filter(str.strip),
    k=st.integers(min_value=1, max_value=30),
)
def test_retrieve_matches_brute_force_oracle(texts, query, k):
    store = fresh_store()
    entries = [DialogueEntry(t, t, T0, i + 1) for i, t in enumerate(texts)]
    store.ingest(entries, EMBEDDER)
    result = store.retrieve(query, k, EMBEDDER)

    vectors = {c.entry.entry_id: c.vector.values for c in store.chunks}
    expected = brute_force_top_k(vectors, EMBEDDER.embed([query])[0].values, k)
    assert [s.chunk.entry.entry_id for s in result.chunks] == [i for i, _ in expected]
    for got, (_, want_score) in zip(result.chunks, expected):
        assert abs(got.score - want_score) < 1e-9


def test_concurrent_ingest_serializes_writers():
    store = fresh_store()
    # same timestamp everywhere so any arrival order satisfies the time check
    batches = [[DialogueEntry(f"q{i}", f"a{i}", T0, i)] for i in range(1, 21)]

    def worker(batch):
        store.ingest(batch, EMBEDDER)

    threads = [threading.Thread(target=worker, args=(b,)) for b in batches]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert len(store) == 20
    assert sorted(c.entry.entry_id for c in store.chunks) == list(range(1, 21))


# --- persistence -----------------------------------------------------------------------


def test_save_load_roundtrip(tmp_path):
    store = fresh_store()
    store.ingest([entry(1, "q1", "a1"), entry(2, "q2", "a2")], EMBEDDER)
    path = tmp_path / "memory.jsonl"
    store.save(path.as_posix())

    loaded = MemoryStore.load(path.as_posix(), expected_model_id=EMBEDDER.model_id)
    assert len(loaded) == 2
    assert [c.rendered_text for c in loaded.chunks] == [c.rendered_text for c in store.chunks]
    original = store.retrieve("q2", 2, EMBEDDER)
    reloaded = loaded.retrieve("q2", 2, EMBEDDER)
    assert [s.chunk.entry.entry_id for s in original.chunks] == [
        s.chunk.entry.entry_id for s in reloaded.chunks
    ]
    assert all(
        abs(a.score - b.score) < 1e-12 for a, b in zip(original.chunks, reloaded.chunks)
    )


def test_load_rejects_model_mismatch(tmp_path):
    store = fresh_store()
    store.ingest([entry(1, "q", "a")], EMBEDDER)
    path = tmp_path / "memory.jsonl"
    store.save(path.as_posix())
    with pytest.raises(ModelMismatch):
        MemoryStore.load(path.as_posix(), expected_model_id="other-model")


def test_load_rejects_foreign_files(tmp_path):
    path = tmp_path / "other.jsonl"
    path.write_text('{"format": "something-else"}\n', encoding="utf-8")
    with pytest.raises(ValueError, match="not a housekeep-memory file"):
        MemoryStore.load(path.as_posix())
    empty = tmp_path / "empty.jsonl"
    empty.write_text("", encoding="utf-8")
    with pytest.raises(ValueError, match="empty"):
        MemoryStore.load(empty.as_posix())


def test_journal_appends_match_full_save(tmp_path):
    journal = tmp_path / "journal.jsonl"
    store = MemoryStore(model_id=EMBEDDER.model_id, journal_path=journal.as_posix())
    store.ingest([entry(1, "q1", "a1")], EMBEDDER)
    store.ingest([entry(2, "q2", "a2")], EMBEDDER)

    saved = tmp_path / "saved.jsonl"
    store.save(saved.as_posix())
    journal_lines = journal.read_text(encoding="utf-8").splitlines()
    saved_lines = saved.read_text(encoding="utf-8").splitlines()
    # journal header predates the first ingest, so its dim is still unset
    assert journal_lines[1:] == saved_lines[1:]
    loaded = MemoryStore.load(journal.as_posix(), expected_model_id=EMBEDDER.model_id)
    assert len(loaded) == 2
