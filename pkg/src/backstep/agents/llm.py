"""Adapter for model-backed agents.

The runtime only ever talks to CompletionBackend, so a production deployment
can plug in a real model client while tests and shipped fixtures use
CannedBackend, which is fully deterministic.  Determinism matters here: the
reset and replay machinery assumes that an agent restored to a checkpoint
will do exactly what it did the first time.

CannedBackend therefore has no internal cursor.  Sequence responses are
indexed by the turn counter the agent carries in its own checkpointed state,
so rewinding the agent rewinds the script with it.
"""

from __future__ import annotations

import hashlib
import json
from typing import Protocol

from ..messages import Envelope
from .base import Agent, ConfigField, HandlerContext


def context_key(request: dict) -> str:
    """Stable short digest of a completion request, for keyed responses."""
    canon = json.dumps(
        {"system": request.get("system", ""), "last": _last_body(request)},
        sort_keys=True,
    )
    return hashlib.sha256(canon.encode()).hexdigest()[:12]


def _last_body(request: dict) -> str:
    messages = request.get("messages", [])
    return str(messages[-1].get("body", "")) if messages else ""


class CompletionBackend(Protocol):
    def complete(self, request: dict) -> str: ...


class CannedBackend:
    """Deterministic backend.

    Resolution order per request: exact match on the context digest, exact
    match on the last message body, then the sequence entry for the agent's
    turn counter, then the fallback template (which may reference {body}).
    """

    def __init__(
        self,
        responses: dict[str, str] | None = None,
        sequence: list[str] | None = None,
        fallback: str = "I have nothing to add about: {body}",
    ):
        self.responses = dict(responses or {})
        self.sequence = list(sequence or [])
        self.fallback = fallback
        self.requests: list[dict] = []

    def complete(self, request: dict) -> str:
        self.requests.append(request)
        last = _last_body(request)
        key = context_key(request)
        if key in self.responses:
            return self.responses[key]
        if last in self.responses:
            return self.responses[last]
        turn = int(request.get("turn", 0))
        if turn < len(self.sequence):
            return self.sequence[turn]
        return self.fallback.format(body=last)


class LlmAgent(Agent):
    """Routes each incoming message through a completion backend.

    The completion always goes back to the sender as a report; routing
    decisions belong to whoever asked.  Conversation history and the turn
    counter live in checkpointed state, so a restored agent rebuilds the
    same requests it sent the first time.
    """

    agent_type = "llm"
    config_schema = (
        ConfigField("system_prompt", str, "Instructions prepended to every request"),
        ConfigField("model_name", str, "Backend model identifier"),
        ConfigField("temperature", float, "Sampling temperature", minimum=0.0, maximum=1.0),
    )

    def __init__(
        self,
        name: str,
        backend: CompletionBackend,
        description: str = "",
        system_prompt: str = "",
        model_name: str = "canned-1",
    ):
        self.backend = backend
        super().__init__(name, description=description, handled_kinds=("task", "report"))
        self._config["system_prompt"] = system_prompt
        self._config["model_name"] = model_name

    def initial_state(self) -> dict:
        return {"history": [], "turns": 0}

    def default_config(self) -> dict:
        return {"system_prompt": "", "model_name": "canned-1", "temperature": 0.0}

    def handle(self, envelope: Envelope, ctx: HandlerContext) -> None:
        incoming = {"sender": envelope.sender, "kind": envelope.kind, "body": envelope.body}
        request = {
            "model": self._config["model_name"],
            "temperature": self._config["temperature"],
            "system": self._config["system_prompt"],
            "messages": self._state["history"] + [incoming],
            "turn": self._state["turns"],
        }
        try:
            text = self.backend.complete(request)
        except Exception as exc:
            # Leave history and turn counter untouched so a retry after the
            # backend recovers sends the identical request.
            ctx.send(envelope.sender, "report", f"backend-error: {exc}")
            return
        self._state["history"] = self._state["history"] + [
            incoming, {"sender": self.name, "kind": "completion", "body": text},
        ]
        self._state["turns"] += 1
        ctx.think(f"Completion on turn {request['turn']}")
        ctx.send(envelope.sender, "report", text)
