"""Shared fixtures: scripted backends, engines, prompt pack, scenario set."""

from __future__ import annotations

import socket

import pytest

from housekeep.evalharness.fixtures import script_path
from housekeep.evalharness.runner import ModelSpec
from housekeep.gateway import ScriptedBackend
from housekeep.orchestrator import AgentBackends, Engine
from housekeep.prompts import load_pack
from housekeep.simulator import load_all_scenarios


def scripted_engine(name: str, k: int = 5) -> Engine:
    path = script_path(name)
    model_id = name.replace("_", "-")

    def factory() -> AgentBackends:
        backend = ScriptedBackend.from_file(path, model_id=model_id)
        return AgentBackends(backend, backend, backend, backend)

    return Engine(factory, deterministic_clock=True, k=k)


def closed_port_url() -> str:
    """A localhost URL nothing listens on, for fast connection-refused paths."""
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        port = sock.getsockname()[1]
    return f"http://127.0.0.1:{port}"


@pytest.fixture(scope="session")
def pack():
    return load_pack()


@pytest.fixture(scope="session")
def scenarios():
    return load_all_scenarios()


@pytest.fixture(scope="session")
def qwen_backend():
    return ScriptedBackend.from_file(script_path("qwen_like"), model_id="qwen-like")


@pytest.fixture(scope="session")
def llama_backend():
    return ScriptedBackend.from_file(script_path("llama_like"), model_id="llama-like")


@pytest.fixture
def qwen_engine():
    return scripted_engine("qwen_like")


@pytest.fixture
def qwen_spec():
    return ModelSpec(name="qwen_like", script=str(script_path("qwen_like")))


@pytest.fixture
def llama_spec():
    return ModelSpec(name="llama_like", script=str(script_path("llama_like")))
