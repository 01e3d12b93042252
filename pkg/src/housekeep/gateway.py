"""Uniform client for chat-completion and embedding inference.

Two interchangeable backends implement the same call surface:

* ``HttpBackend`` speaks the OpenAI-compatible wire protocol
  (POST {base_url}/v1/chat/completions and /v1/embeddings).
* ``ScriptedBackend`` replays canned replies keyed on the transcript and
  embeds with a deterministic hash embedder, so tests and demos never
  need a model server.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Protocol, Sequence

import requests


class GatewayError(Exception):
    """Base class for gateway failures."""


class TransportError(GatewayError):
    """Network-level failure (unreachable host, timeout)."""


class ProtocolError(GatewayError):
    """The backend answered, but the document violates the protocol contract."""


class BackendRefusal(GatewayError):
    """Non-2xx status; the response body is preserved for diagnosis."""

    def __init__(self, status_code: int, body: str):
        super().__init__(f"backend refused with status {status_code}: {body[:200]}")
        self.status_code = status_code
        self.body = body


ROLES = ("system", "user", "assistant", "tool")


@dataclass(frozen=True)
class ToolCall:
    name: str
    arguments: dict

    def to_dict(self) -> dict:
        return {"name": self.name, "arguments": self.arguments}


@dataclass(frozen=True)
class ChatMessage:
    role: str
    content: str = ""
    tool_calls: tuple[ToolCall, ...] = ()

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValueError(f"invalid role: {self.role!r}")
        if self.tool_calls and self.role != "assistant":
            raise ValueError("tool_calls are only valid on assistant messages")


@dataclass(frozen=True)
class ToolSpec:
    name: str
    description: str
    parameters: dict = field(default_factory=lambda: {"type": "object", "properties": {}})

    def to_wire(self) -> dict:
        return {
            "type": "function",
            "function": {
                "name": self.name,
                "description": self.description,
                "parameters": self.parameters,
            },
        }


@dataclass(frozen=True)
class EmbeddingVector:
    values: tuple[float, ...]
    model_id: str

    def __post_init__(self):
        if not self.values:
            raise ValueError("embedding must be non-empty")
        if not math.isfinite(sum(v * v for v in self.values)):
            raise ValueError("embedding contains non-finite values")
        if all(v == 0.0 for v in self.values):
            raise ValueError("embedding norm must be positive")

    @property
    def dim(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class BackendConfig:
    base_url: str
    model: str
    temperature: float = 0.0
    max_tokens: int = 1024
    timeout_s: float = 30.0
    api_key: str = ""

    def __post_init__(self):
        if not (math.isfinite(self.temperature) and self.temperature >= 0):
            raise ValueError("temperature must be finite and >= 0")
        if self.max_tokens <= 0:
            raise ValueError("max_tokens must be positive")


class ChatBackend(Protocol):
    model_id: str

    def chat(self, messages: Sequence[ChatMessage], tools: Sequence[ToolSpec] = ()) -> ChatMessage: ...


class EmbeddingBackend(Protocol):
    model_id: str

    def embed(self, texts: Sequence[str]) -> list[EmbeddingVector]: ...


def _check_chat_preconditions(messages: Sequence[ChatMessage]) -> None:
    if not messages:
        raise ValueError("messages must be non-empty")
    if messages[0].role != "system":
        raise ValueError("first message must have role system")


def transcript_digest(messages: Sequence[ChatMessage]) -> str:
    """Stable digest of a (role, content) transcript, for script matching."""
    joined = "\x1e".join(f"{m.role}\x1f{m.content}" for m in messages)
    return hashlib.sha256(joined.encode("utf-8")).hexdigest()


# --- HTTP backend (OpenAI-compatible wire protocol) ---------------------------

class HttpBackend:
    """Client for any server speaking the OpenAI-compatible document format.

    Retries once on TransportError, never on ProtocolError: a flaky network is
    worth a second attempt, a broken contract is not.
    """

    def __init__(self, config: BackendConfig, session: requests.Session | None = None):
        self.config = config
        self.model_id = config.model
        self._session = session or requests.Session()

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        if self.config.api_key:
            headers["Authorization"] = f"Bearer {self.config.api_key}"
        return headers

    def _post(self, path: str, payload: dict) -> dict:
        url = self.config.base_url.rstrip("/") + path
        last_exc: Exception | None = None
        for _ in range(2):  # one retry on transport failure
            try:
                resp = self._session.post(
                    url, json=payload, headers=self._headers(), timeout=self.config.timeout_s
                )
            except requests.RequestException as exc:
                last_exc = exc
                continue
            if resp.status_code < 200 or resp.status_code >= 300:
                raise BackendRefusal(resp.status_code, resp.text)
            try:
                return resp.json()
            except ValueError as exc:
                raise ProtocolError(f"response is not JSON: {exc}") from exc
        raise TransportError(f"POST {url} failed: {last_exc}") from last_exc

    def chat(self, messages: Sequence[ChatMessage], tools: Sequence[ToolSpec] = ()) -> ChatMessage:
        _check_chat_preconditions(messages)
        payload: dict = {
            "model": self.config.model,
            "messages": [{"role": m.role, "content": m.content} for m in messages],
            "temperature": self.config.temperature,
            "max_tokens": self.config.max_tokens,
        }
        if tools:
            payload["tools"] = [t.to_wire() for t in tools]
        doc = self._post("/v1/chat/completions", payload)
        return _parse_chat_response(doc)

    def embed(self, texts: Sequence[str]) -> list[EmbeddingVector]:
        _check_embed_preconditions(texts)
        doc = self._post("/v1/embeddings", {"model": self.config.model, "input": list(texts)})
        try:
            items = sorted(doc["data"], key=lambda d: d["index"])
            vectors = [
                EmbeddingVector(tuple(float(v) for v in item["embedding"]), self.config.model)
                for item in items
            ]
        except (KeyError, TypeError, ValueError) as exc:
            raise ProtocolError(f"malformed embeddings response: {exc}") from exc
        if len(vectors) != len(texts):
            raise ProtocolError(f"expected {len(texts)} embeddings, got {len(vectors)}")
        dims = {v.dim for v in vectors}
        if len(dims) > 1:
            raise ProtocolError(f"embedding dimensions disagree: {sorted(dims)}")
        return vectors

    def reachable(self) -> bool:
        """Cheap reachability probe against the models listing endpoint."""
        url = self.config.base_url.rstrip("/") + "/v1/models"
        try:
            resp = self._session.get(url, headers=self._headers(), timeout=self.config.timeout_s)
            return resp.status_code < 500
        except requests.RequestException:
            return False


def _parse_chat_response(doc: dict) -> ChatMessage:
    try:
        message = doc["choices"][0]["message"]
        content = message.get("content") or ""
        calls = []
        for raw in message.get("tool_calls") or []:
            fn = raw["function"]
            args = fn.get("arguments") or "{}"
            if isinstance(args, str):
                args = json.loads(args) if args.strip() else {}
            calls.append(ToolCall(fn["name"], args))
        return ChatMessage("assistant", content, tuple(calls))
    except (KeyError, IndexError, TypeError, json.JSONDecodeError) as exc:
        raise ProtocolError(f"malformed chat response: {exc}") from exc


def _check_embed_preconditions(texts: Sequence[str]) -> None:
    if not texts:
        raise ValueError("texts must be non-empty")
    if any(not t for t in texts):
        raise ValueError("every text must be non-empty")


def chat(config: BackendConfig, messages: Sequence[ChatMessage], tools: Sequence[ToolSpec] = ()) -> ChatMessage:
    """One-shot chat call over the wire protocol."""
    return HttpBackend(config).chat(messages, tools)


def embed(config: BackendConfig, texts: Sequence[str]) -> list[EmbeddingVector]:
    """One-shot embedding call over the wire protocol."""
    return HttpBackend(config).embed(texts)


# --- Deterministic hash embedder ----------------------------------------------

HASH_EMBEDDER_MODEL = "hash-ngram-256"
HASH_EMBEDDER_DIM = 256

_TOKEN_RE = re.compile(r"[a-z0-9]+")


class HashEmbedder:
    """Token n-gram hashing into a fixed 256-dim L2-normalized vector.

    A pure function of (model_id, text) built on blake2b, so results are
    bit-stable across processes and runs. Ships so CI and demos never
    download model weights.
    """

    def __init__(self, model_id: str = HASH_EMBEDDER_MODEL, dim: int = HASH_EMBEDDER_DIM):
        self.model_id = model_id
        self.dim = dim

    def _embed_one(self, text: str) -> EmbeddingVector:
        tokens = _TOKEN_RE.findall(text.casefold())
        grams: list[str] = []
        for n in (1, 2, 3):
            grams.extend("▁".join(tokens[i : i + n]) for i in range(len(tokens) - n + 1))
        values = [0.0] * self.dim
        for gram in grams:
            digest = hashlib.blake2b(
                f"{self.model_id}\x00{gram}".encode("utf-8"), digest_size=8
            ).digest()
            h = int.from_bytes(digest, "big")
            sign = 1.0 if (h >> 60) & 1 else -1.0
            values[h % self.dim] += sign
        if all(v == 0.0 for v in values):
            # token-less input (punctuation only): still give a unit direction
            h = int.from_bytes(hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest(), "big")
            values[h % self.dim] = 1.0
        norm = math.sqrt(sum(v * v for v in values))
        return EmbeddingVector(tuple(v / norm for v in values), self.model_id)

    def embed(self, texts: Sequence[str]) -> list[EmbeddingVector]:
        _check_embed_preconditions(texts)
        return [self._embed_one(t) for t in texts]


# --- Scripted backend ----------------------------------------------------------

class ScriptedBackend:
    """Deterministic stand-in for a model server.

    The script is a document array of
    ``{"match": {"last_user_message": ...} | {"transcript_digest": ...},
       "reply": {"content": ..., "tool_calls": [...]?}}``.
    Lookup tries the transcript digest first, then the exact last user
    message. A transcript with no match raises ProtocolError naming it, so
    missing script entries fail loudly instead of silently derailing a test.

    The tables are immutable after construction; concurrent readers are safe.
    """

    def __init__(
        self,
        entries: Iterable[dict],
        model_id: str = "scripted",
        embedder: HashEmbedder | None = None,
    ):
        self.model_id = model_id
        self._embedder = embedder or HashEmbedder()
        by_message: dict[str, ChatMessage] = {}
        by_digest: dict[str, ChatMessage] = {}
        for entry in entries:
            reply = _reply_to_message(entry["reply"])
            match = entry["match"]
            if "transcript_digest" in match:
                by_digest[match["transcript_digest"]] = reply
            elif "last_user_message" in match:
                by_message[match["last_user_message"]] = reply
            else:
                raise ValueError(f"script entry has no usable match clause: {entry!r}")
        self._by_message = by_message
        self._by_digest = by_digest

    @classmethod
    def from_file(cls, path, model_id: str = "scripted") -> "ScriptedBackend":
        with open(path, "r", encoding="utf-8") as fh:
            return cls(json.load(fh), model_id=model_id)

    def chat(self, messages: Sequence[ChatMessage], tools: Sequence[ToolSpec] = ()) -> ChatMessage:
        _check_chat_preconditions(messages)
        reply = self._by_digest.get(transcript_digest(messages))
        if reply is not None:
            return reply
        last_user = next((m.content for m in reversed(messages) if m.role == "user"), None)
        if last_user is not None and last_user in self._by_message:
            return self._by_message[last_user]
        raise ProtocolError(
            "scripted backend has no reply for transcript ending with user message: "
            f"{last_user!r}"
        )

    def embed(self, texts: Sequence[str]) -> list[EmbeddingVector]:
        return self._embedder.embed(texts)

    def reachable(self) -> bool:
        return True


def _reply_to_message(reply: dict) -> ChatMessage:
    calls = tuple(
        ToolCall(c["name"], c.get("arguments") or {}) for c in reply.get("tool_calls") or []
    )
    return ChatMessage("assistant", reply.get("content") or "", calls)
