import pytest

from backstep import Runtime, SessionManager, build_team, load_team, seed_task
from backstep.agents.base import Agent


class EchoAgent(Agent):
    """Minimal deterministic agent for runtime-level tests: one thought,
    one reply to the sender."""

    agent_type = "echo"

    def handle(self, envelope, ctx):
        count = self._state.setdefault("handled", 0) + 1
        self._state["handled"] = count
        ctx.think(f"echo #{count}")
        ctx.send(envelope.sender, "report", f"echo: {envelope.body}")


class SilentAgent(Agent):
    """Consumes messages without emitting anything."""

    agent_type = "silent"

    def handle(self, envelope, ctx):
        self._state["last"] = envelope.body


class BrokenHandlerAgent(Agent):
    """Raises on a trigger word; used for handler fault paths."""

    agent_type = "broken"

    def handle(self, envelope, ctx):
        if "boom" in envelope.body:
            raise RuntimeError(f"exploded on {envelope.body!r}")
        ctx.send(envelope.sender, "report", "ok")


class BrokenSnapshotAgent(Agent):
    """save_state raises once armed; used for snapshot fault paths."""

    agent_type = "broken-snapshot"

    def __init__(self, name, **kwargs):
        super().__init__(name, **kwargs)
        self.armed = False

    def handle(self, envelope, ctx):
        ctx.send(envelope.sender, "report", "fine")

    def save_state(self):
        if self.armed:
            raise ValueError("snapshot refused")
        return super().save_state()


@pytest.fixture
def runtime():
    rt = Runtime()
    rt.register_agent(EchoAgent("alpha"))
    rt.register_agent(EchoAgent("beta"))
    rt.register_agent(SilentAgent("sink"))
    return rt


@pytest.fixture
def managed(runtime):
    return runtime, SessionManager(runtime, expected_answer=None)


def build(name):
    spec = load_team(name)
    rt, mgr = build_team(spec)
    return spec, rt, mgr


def run_team(name, max_steps=None):
    """Load a shipped team, run its task to completion, return the pieces."""
    spec, rt, mgr = build(name)
    seed_task(mgr, spec)
    report = rt.run(max_steps=max_steps)
    return spec, rt, mgr, report


def canon_envelope(doc: dict) -> tuple:
    """The deterministic identity of a history entry: everything except the
    run-assigned ids and clock values."""
    return (
        doc["seq"],
        doc["sender"],
        doc["recipient"],
        doc["kind"],
        tuple(sorted((k, str(v)) for k, v in doc["payload"].items())),
        doc["provenance"],
    )


def canon_history(runtime, session_id) -> list[tuple]:
    return [canon_envelope(item.to_dict()) for item in runtime.history(session_id)]
