"""Timestamped dialogue memory: chunking, embedding, exact top-k retrieval.

One chunk per question-answer pair, rendered with its timestamp so temporal
wording in queries can match. Retrieval is exact cosine over an in-memory
matrix (at household scale exactness is free); persistence is an append-only
journal of line-delimited JSON documents under a header that pins the
embedding model and dimension.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass
from datetime import datetime

import numpy as np

from .clockutil import from_iso_z, to_iso_z
from .gateway import EmbeddingBackend, EmbeddingVector

STORE_FORMAT = "housekeep-memory"
STORE_VERSION = 1


class MemoryStoreError(Exception):
    """Base class for memory-store failures."""


class DuplicateEntry(MemoryStoreError):
    def __init__(self, entry_id: int):
        super().__init__(f"entry_id {entry_id} already ingested")
        self.entry_id = entry_id


class EmptyStore(MemoryStoreError):
    def __init__(self):
        super().__init__("retrieval from an empty store")


class ModelMismatch(MemoryStoreError):
    def __init__(self, expected: str, found: str):
        super().__init__(f"store was embedded with {expected!r}, got {found!r}")
        self.expected = expected
        self.found = found


@dataclass(frozen=True)
class DialogueEntry:
    question: str
    answer: str
    timestamp: datetime
    entry_id: int

    def __post_init__(self):
        if not self.question.strip() or not self.answer.strip():
            raise ValueError("question and answer must be non-empty")


@dataclass(frozen=True)
class MemoryChunk:
    entry: DialogueEntry
    rendered_text: str
    vector: EmbeddingVector


@dataclass(frozen=True)
class ScoredChunk:
    chunk: MemoryChunk
    score: float


@dataclass(frozen=True)
class RetrievalResult:
    chunks: tuple[ScoredChunk, ...]
    k_requested: int

    @property
    def k_returned(self) -> int:
        return len(self.chunks)


def render_chunk(entry: DialogueEntry) -> str:
    """Bit-stable rendering: ``[<ISO timestamp>] Q: <question> A: <answer>``."""
    return f"[{to_iso_z(entry.timestamp)}] Q: {entry.question} A: {entry.answer}"


class MemoryStore:
    """Exact-cosine chunk store with copy-on-write snapshots.

    Writers are serialized by a lock and publish a new (chunks, matrix)
    snapshot atomically, so concurrent readers see either the pre- or
    post-ingest state, never a partial one. If ``journal_path`` is set,
    ingested entries are appended to the journal as they land.
    """

    def __init__(self, model_id: str, dim: int | None = None, journal_path: str | None = None):
        self.model_id = model_id
        self.dim = dim
        self.journal_path = journal_path
        self._chunks: tuple[MemoryChunk, ...] = ()
        self._matrix: np.ndarray | None = None  # unit rows, one per chunk
        self._ids: np.ndarray | None = None
        self._write_lock = threading.Lock()
        if journal_path and not os.path.exists(journal_path):
            self._write_header()

    def __len__(self) -> int:
        return len(self._chunks)

    @property
    def chunks(self) -> tuple[MemoryChunk, ...]:
        return self._chunks

    def next_entry_id(self) -> int:
        chunks = self._chunks
        return chunks[-1].entry.entry_id + 1 if chunks else 1

    # -- ingestion ------------------------------------------------------------

    def ingest(self, entries: list[DialogueEntry], backend: EmbeddingBackend) -> None:
        """Embed and persist one chunk per entry; no-op on an empty list."""
        if not entries:
            return
        if backend.model_id != self.model_id:
            raise ModelMismatch(self.model_id, backend.model_id)
        with self._write_lock:
            known = {c.entry.entry_id for c in self._chunks}
            for entry in entries:
                if entry.entry_id in known:
                    raise DuplicateEntry(entry.entry_id)
                known.add(entry.entry_id)
            self._check_chronology(entries)

            rendered = [render_chunk(e) for e in entries]
            vectors = backend.embed(rendered)
            new_chunks = tuple(
                MemoryChunk(e, text, vec)
                for e, text, vec in zip(entries, rendered, vectors)
            )
            self._publish(self._chunks + new_chunks)
            if self.journal_path:
                self._append_journal(new_chunks)

    def _check_chronology(self, entries: list[DialogueEntry]) -> None:
        combined = sorted(
            [(c.entry.entry_id, c.entry.timestamp) for c in self._chunks]
            + [(e.entry_id, e.timestamp) for e in entries]
        )
        for (id_a, ts_a), (id_b, ts_b) in zip(combined, combined[1:]):
            if ts_b < ts_a:
                raise ValueError(
                    f"entry {id_b} is timestamped before entry {id_a}; "
                    "entry_id order must follow timestamp order"
                )

    def _publish(self, chunks: tuple[MemoryChunk, ...]) -> None:
        if chunks:
            dims = {c.vector.dim for c in chunks}
            if len(dims) != 1:
                raise ValueError(f"mixed embedding dimensions in store: {sorted(dims)}")
            dim = dims.pop()
            if self.dim is not None and dim != self.dim:
                raise ValueError(f"embedding dim {dim} does not match store dim {self.dim}")
            self.dim = dim
            matrix = np.array([c.vector.values for c in chunks], dtype=np.float64)
            norms = np.linalg.norm(matrix, axis=1, keepdims=True)
            matrix = matrix / norms
            ids = np.array([c.entry.entry_id for c in chunks], dtype=np.int64)
        else:
            matrix, ids = None, None
        # single reference assignment keeps reader snapshots consistent
        self._chunks, self._matrix, self._ids = chunks, matrix, ids

    # -- retrieval --------------------------------------------------------------

    def retrieve(self, query: str, k: int, backend: EmbeddingBackend) -> RetrievalResult:
        """Top-k chunks by cosine similarity; equal scores break toward higher entry_id."""
        if k <= 0:
            raise ValueError("k must be positive")
        chunks, matrix, ids = self._chunks, self._matrix, self._ids
        if not chunks:
            raise EmptyStore()
        if backend.model_id != self.model_id:
            raise ModelMismatch(self.model_id, backend.model_id)
        qvec = np.array(backend.embed([query])[0].values, dtype=np.float64)
        qvec = qvec / np.linalg.norm(qvec)
        # ranking must not depend on float summation order, so snap scores to a
        # 1e-12 grid before sorting; genuinely different scores sit far apart
        scores = np.round(matrix @ qvec, 12)
        # primary: score descending; secondary: entry_id descending (recent wins)
        order = np.lexsort((-ids, -scores))[: min(k, len(chunks))]
        scored = tuple(
            ScoredChunk(chunks[i], float(np.clip(scores[i], -1.0, 1.0))) for i in order
        )
        return RetrievalResult(scored, k_requested=k)

    # -- persistence -------------------------------------------------------------

    def _header(self) -> dict:
        return {
            "format": STORE_FORMAT,
            "version": STORE_VERSION,
            "model_id": self.model_id,
            "dim": self.dim,
        }

    def _write_header(self) -> None:
        with open(self.journal_path, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(self._header(), sort_keys=True) + "\n")

    @staticmethod
    def _chunk_line(chunk: MemoryChunk) -> str:
        entry = chunk.entry
        return json.dumps(
            {
                "entry_id": entry.entry_id,
                "timestamp": to_iso_z(entry.timestamp),
                "question": entry.question,
                "answer": entry.answer,
                "vector": list(chunk.vector.values),
                "model_id": chunk.vector.model_id,
            },
            sort_keys=True,
        )

    def _append_journal(self, chunks: tuple[MemoryChunk, ...]) -> None:
        with open(self.journal_path, "a", encoding="utf-8") as fh:
            for chunk in chunks:
                fh.write(self._chunk_line(chunk) + "\n")

    def save(self, path: str) -> None:
        """Rewrite the full store (header plus one document per chunk)."""
        tmp = path + ".tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(self._header(), sort_keys=True) + "\n")
            for chunk in self._chunks:
                fh.write(self._chunk_line(chunk) + "\n")
        os.replace(tmp, path)

    @classmethod
    def load(cls, path: str, expected_model_id: str | None = None) -> "MemoryStore":
        """Load a store file; a model mismatch is a hard error."""
        with open(path, "r", encoding="utf-8") as fh:
            lines = [line for line in fh.read().splitlines() if line.strip()]
        if not lines:
            raise ValueError(f"{path} is empty")
        header = json.loads(lines[0])
        if header.get("format") != STORE_FORMAT:
            raise ValueError(f"{path} is not a {STORE_FORMAT} file")
        model_id = header["model_id"]
        if expected_model_id is not None and model_id != expected_model_id:
            raise ModelMismatch(expected_model_id, model_id)
        store = cls(model_id=model_id, dim=header.get("dim"))
        chunks = []
        for line in lines[1:]:
            doc = json.loads(line)
            if doc["model_id"] != model_id:
                raise ModelMismatch(model_id, doc["model_id"])
            entry = DialogueEntry(
                question=doc["question"],
                answer=doc["answer"],
                timestamp=from_iso_z(doc["timestamp"]),
                entry_id=int(doc["entry_id"]),
            )
            vector = EmbeddingVector(tuple(float(v) for v in doc["vector"]), model_id)
            chunks.append(MemoryChunk(entry, render_chunk(entry), vector))
        store._publish(tuple(chunks))
        return store
