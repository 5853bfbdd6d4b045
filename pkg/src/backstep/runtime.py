"""The message runtime: agents, the queue, and checkpointed dispatch.

Execution is strictly sequential.  One step dispatches exactly one queued
message; before anything is dispatched, every agent's state is checkpointed
under the sequence number the message is about to receive.  That ordering is
the heart of the whole tool: any message in history can later be re-entered
by restoring its checkpoint, because the checkpoint is guaranteed to predate
every effect of that message.

Histories are per-session and forked sessions share their prefix with the
parent by reference: a child session only stores the envelopes it executed
itself, and views are assembled by walking the lineage.

A hidden "user" proxy agent is registered at construction so that replies to
the human are ordinary routed messages; it never appears in team listings
and its handler does nothing.
"""

from __future__ import annotations

import contextlib
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Callable

from .agents.base import Agent, HandlerContext, UserProxyAgent
from .checkpoints import AgentStateDoc, Checkpoint, CheckpointStore
from .errors import (
    DuplicateAgentError,
    FaultedError,
    NoCheckpointError,
    NotPausedError,
    RestoreError,
    RosterMismatchError,
    SnapshotError,
    UnknownAgentError,
    UnknownSeqError,
    UnknownSessionError,
)
from .messages import (
    BROADCAST,
    RESERVED_NAMES,
    USER,
    Envelope,
    HistoryItem,
    Provenance,
    QueueEntry,
    Thought,
)

PAUSED = "paused"
STEPPING = "stepping"
RUNNING = "running"


@dataclass
class Session:
    """One branch of execution.  Owns only its suffix of the history."""

    session_id: str
    parent_id: str | None
    fork_seq: int
    next_seq: int
    envelopes: list[Envelope] = field(default_factory=list)
    thoughts: list[Thought] = field(default_factory=list)
    label: str | None = None
    seed: dict | None = None  # the queue entry that (re)started this branch
    verdict: dict | None = None
    created_at: float = field(default_factory=time.time)

    def to_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "parent_id": self.parent_id,
            "fork_seq": None if self.parent_id is None else self.fork_seq,
            "next_seq": self.next_seq,
            "label": self.label,
            "message_count": len(self.envelopes),
            "verdict": self.verdict,
            "created_at": self.created_at,
        }


@dataclass
class RunState:
    mode: str
    faulted: bool
    queue_length: int
    active_session: str
    in_flight: Envelope | None = None

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "faulted": self.faulted,
            "queue_length": self.queue_length,
            "active_session": self.active_session,
            "in_flight": self.in_flight.to_dict() if self.in_flight else None,
        }


@dataclass
class StepResult:
    status: str  # "dispatched" | "empty-queue" | "handler-error"
    envelope: Envelope | None = None
    error_envelope: Envelope | None = None
    emitted: list[QueueEntry] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "envelope": self.envelope.to_dict() if self.envelope else None,
            "error_envelope": self.error_envelope.to_dict() if self.error_envelope else None,
            "emitted": [entry.to_dict() for entry in self.emitted],
        }


@dataclass
class RunReport:
    steps: int
    stop_reason: str  # "queue-empty" | "paused" | "ceiling-hit" | "handler-error"

    def to_dict(self) -> dict:
        return {"steps": self.steps, "stop_reason": self.stop_reason}


class Runtime:
    """Sequential dispatcher with checkpoint-before-dispatch semantics."""

    def __init__(self, store: CheckpointStore | None = None, default_max_steps: int = 200):
        self.store = store or CheckpointStore()
        self.default_max_steps = default_max_steps
        self.agents: dict[str, Agent] = {}
        self.queue: deque[QueueEntry] = deque()
        self.sessions: dict[str, Session] = {}
        self.mode = PAUSED
        self.faulted = False
        self.in_flight: Envelope | None = None
        self._pause_requested = False
        self._next_message_id = 1
        self._next_session_id = 1
        self._next_enqueue_order = 1
        self._listeners: list[Callable[[str, dict], None]] = []
        root = Session(session_id="s0", parent_id=None, fork_seq=0, next_seq=0)
        self.sessions[root.session_id] = root
        self.active_session_id = root.session_id
        self.agents[USER] = UserProxyAgent(USER)

    # -- events -------------------------------------------------------------

    def on_event(self, listener: Callable[[str, dict], None]) -> None:
        self._listeners.append(listener)

    def emit(self, name: str, data: dict) -> None:
        for listener in self._listeners:
            listener(name, data)

    def _emit_run_state(self) -> None:
        self.emit("runstate-changed", {"run_state": self.run_state().to_dict()})

    # -- registration ---------------------------------------------------------

    def register_agent(self, agent: Agent) -> None:
        self.require_paused()
        if agent.name in RESERVED_NAMES:
            raise DuplicateAgentError(f"agent name '{agent.name}' is reserved")
        if agent.name in self.agents:
            raise DuplicateAgentError(f"agent '{agent.name}' is already registered")
        self.agents[agent.name] = agent

    def agent(self, name: str) -> Agent:
        if name not in self.agents:
            raise UnknownAgentError(f"no agent named '{name}'")
        return self.agents[name]

    def listed_agents(self) -> list[Agent]:
        """Registered agents minus the hidden user proxy."""
        return [a for a in self.agents.values() if not isinstance(a, UserProxyAgent)]

    def descriptors(self) -> list[dict]:
        return [a.descriptor().to_dict() for a in self.listed_agents()]

    # -- sessions -------------------------------------------------------------

    def session(self, session_id: str) -> Session:
        if session_id not in self.sessions:
            raise UnknownSessionError(f"no session '{session_id}'")
        return self.sessions[session_id]

    @property
    def active_session(self) -> Session:
        return self.sessions[self.active_session_id]

    def set_active_session(self, session_id: str) -> None:
        self.session(session_id)
        if session_id != self.active_session_id:
            self.active_session_id = session_id
            self._emit_run_state()

    def new_session(self, parent_id: str, fork_seq: int, label: str | None = None) -> Session:
        parent = self.session(parent_id)
        session = Session(
            session_id=f"s{self._next_session_id}",
            parent_id=parent.session_id,
            fork_seq=fork_seq,
            next_seq=fork_seq,
            label=label,
        )
        self._next_session_id += 1
        self.sessions[session.session_id] = session
        self.emit("session-created", {"session": session.to_dict()})
        return session

    def lineage(self, session_id: str) -> list[Session]:
        """Sessions from the root down to the given one."""
        chain = []
        current: str | None = session_id
        while current is not None:
            session = self.session(current)
            chain.append(session)
            current = session.parent_id
        chain.reverse()
        return chain

    def history(self, session_id: str) -> list[HistoryItem]:
        """The session's full view: inherited prefix plus owned suffix."""
        target = self.session(session_id)
        items: list[HistoryItem] = []
        cutoff = float("inf")
        for session in reversed(self.lineage(session_id)):
            for env in session.envelopes:
                if env.seq < cutoff:
                    items.append(HistoryItem(env, inherited=env.seq < target.fork_seq))
            cutoff = min(cutoff, session.fork_seq)
        items.sort(key=lambda item: item.envelope.seq)
        return items

    def thoughts(self, session_id: str) -> list[tuple[Thought, bool]]:
        """All thoughts visible from a session, with inherited flags."""
        target = self.session(session_id)
        found: list[tuple[Thought, bool]] = []
        cutoff = float("inf")
        for session in reversed(self.lineage(session_id)):
            for thought in session.thoughts:
                if thought.seq_anchor < cutoff:
                    found.append((thought, thought.seq_anchor < target.fork_seq))
            cutoff = min(cutoff, session.fork_seq)
        found.sort(key=lambda pair: pair[0].seq_anchor)
        return found

    def full_history(self, session_id: str) -> list[dict]:
        """Messages and thoughts interleaved by seq, each tagged with type.

        A thought anchored at seq k was emitted while processing message k,
        so it sorts directly after that message.
        """
        docs: list[tuple[tuple, dict]] = []
        for item in self.history(session_id):
            doc = dict(item.to_dict(), item_type="message")
            docs.append(((item.envelope.seq, 0), doc))
        for thought, inherited in self.thoughts(session_id):
            doc = dict(
                thought.to_dict(),
                seq=thought.seq_anchor,
                inherited=inherited,
                item_type="thought",
            )
            docs.append(((thought.seq_anchor, 1), doc))
        docs.sort(key=lambda pair: pair[0])
        return [doc for _, doc in docs]

    def find_envelope(self, session_id: str, seq: int) -> Envelope:
        for item in self.history(session_id):
            if item.envelope.seq == seq:
                return item.envelope
        raise UnknownSeqError(f"session '{session_id}' has no message with seq {seq}")

    # -- queue ------------------------------------------------------------------

    def _validate_entry(self, entry: QueueEntry) -> None:
        if entry.sender != USER and entry.sender not in self.agents:
            raise UnknownAgentError(f"unknown sender '{entry.sender}'")
        if entry.recipient not in RESERVED_NAMES and entry.recipient not in self.agents:
            raise UnknownAgentError(f"unknown recipient '{entry.recipient}'")

    def _stamp(self, entry: QueueEntry) -> QueueEntry:
        entry.enqueue_order = self._next_enqueue_order
        self._next_enqueue_order += 1
        return entry

    def enqueue(
        self,
        sender: str,
        recipient: str,
        kind: str,
        payload: dict | str,
        provenance: Provenance = Provenance.ORIGINAL,
    ) -> QueueEntry:
        if isinstance(payload, str):
            payload = {"body": payload}
        entry = QueueEntry(
            sender=sender,
            recipient=recipient,
            kind=kind,
            payload=dict(payload),
            provenance=provenance,
        )
        self._validate_entry(entry)
        self.queue.append(self._stamp(entry))
        self.emit("queue-changed", {"queue": self.queue_doc()})
        return entry

    def queue_doc(self) -> list[dict]:
        return [dict(entry.to_dict(), position=i) for i, entry in enumerate(self.queue)]

    def clear_queue(self) -> None:
        if self.queue:
            self.queue.clear()
            self.emit("queue-changed", {"queue": []})

    def load_queue(self, entries: list[QueueEntry]) -> None:
        """Replace the queue, re-stamping orders but keeping FIFO position."""
        self.queue.clear()
        for entry in entries:
            self.queue.append(self._stamp(entry))
        self.emit("queue-changed", {"queue": self.queue_doc()})

    # -- state capture -----------------------------------------------------------

    def snapshot_states(self) -> dict[str, AgentStateDoc]:
        states: dict[str, AgentStateDoc] = {}
        for name, agent in self.agents.items():
            try:
                content = agent.save_state()
            except Exception as exc:
                raise SnapshotError(
                    f"agent '{name}' failed to save state: {exc}", {"agent": name}
                )
            states[name] = AgentStateDoc(agent=name, agent_type=agent.agent_type, content=content)
        return states

    def take_checkpoint(self, session_id: str, seq: int, include_queue: bool = False) -> Checkpoint:
        queue = [entry.to_dict() for entry in self.queue] if include_queue else None
        checkpoint = Checkpoint(
            session_id=session_id, seq=seq, agents=self.snapshot_states(), queue=queue
        )
        self.store.put(checkpoint)
        return checkpoint

    def restore_checkpoint(self, checkpoint: Checkpoint) -> None:
        """Load every agent's state from the checkpoint.  The roster must
        match exactly; a load failure leaves the runtime faulted."""
        current = {(name, agent.agent_type) for name, agent in self.agents.items()}
        if checkpoint.roster() != current:
            missing = sorted(n for n, _ in checkpoint.roster() - current)
            extra = sorted(n for n, _ in current - checkpoint.roster())
            raise RosterMismatchError(
                "checkpoint was taken with a different team",
                {"missing": missing, "extra": extra},
            )
        for name, doc in checkpoint.agents.items():
            try:
                self.agents[name].load_state(doc.content)
            except Exception as exc:
                self.faulted = True
                self._emit_run_state()
                raise RestoreError(
                    f"agent '{name}' failed to load state: {exc}", {"agent": name}
                )
        if self.faulted:
            self.faulted = False
            self._emit_run_state()

    def resolve_checkpoint(self, session_id: str, seq: int) -> Checkpoint:
        """Find the checkpoint for a seq as seen from a session, walking the
        lineage to whichever ancestor actually executed it."""
        # The owner is the nearest ancestor whose owned range still contains
        # the seq after lineage truncation.
        cutoff = float("inf")
        current: Session | None = self.session(session_id)
        while current is not None:
            if current.fork_seq <= seq < cutoff:
                found = self.store.get(current.session_id, seq)
                if found is not None:
                    return found
                break
            cutoff = min(cutoff, current.fork_seq)
            current = self.sessions.get(current.parent_id) if current.parent_id else None
        raise NoCheckpointError(f"session '{session_id}' has no checkpoint for seq {seq}")

    # -- stepping -----------------------------------------------------------------

    def run_state(self) -> RunState:
        return RunState(
            mode=self.mode,
            faulted=self.faulted,
            queue_length=len(self.queue),
            active_session=self.active_session_id,
            in_flight=self.in_flight,
        )

    def _append_envelope(self, session: Session, entry: QueueEntry, seq: int) -> Envelope:
        envelope = Envelope(
            message_id=f"m{self._next_message_id}",
            seq=seq,
            session_id=session.session_id,
            sender=entry.sender,
            recipient=entry.recipient,
            kind=entry.kind,
            payload=dict(entry.payload),
            provenance=entry.provenance,
        )
        self._next_message_id += 1
        session.envelopes.append(envelope)
        session.next_seq = seq + 1
        self.emit("message-appended", {"envelope": envelope.to_dict()})
        return envelope

    def _dispatch_targets(self, entry: QueueEntry) -> list[Agent]:
        if entry.recipient == USER:
            return []
        if entry.recipient == BROADCAST:
            return [
                agent
                for agent in self.listed_agents()
                if agent.name != entry.sender and agent.handles(entry.kind)
            ]
        target = self.agents[entry.recipient]
        if isinstance(target, UserProxyAgent) or not target.handles(entry.kind):
            return []
        return [target]

    def step(self) -> StepResult:
        """Dispatch exactly one queued message.  No-op on an empty queue."""
        if self.faulted:
            raise FaultedError("runtime is faulted; restore a checkpoint first")
        self.require_paused()
        if not self.queue:
            return StepResult(status="empty-queue")
        self.mode = STEPPING
        self._emit_run_state()
        try:
            return self._step_once()
        finally:
            self.mode = PAUSED
            self._pause_requested = False
            self._emit_run_state()

    def _step_once(self) -> StepResult:
        """The dispatch itself; callers manage mode transitions."""
        if not self.queue:
            return StepResult(status="empty-queue")

        session = self.active_session
        entry = self.queue[0]
        seq = session.next_seq

        # Checkpoint before any effect of this message can happen.  If the
        # snapshot fails the entry stays queued and no seq is consumed.
        self.take_checkpoint(session.session_id, seq)

        self.queue.popleft()
        envelope = self._append_envelope(session, entry, seq)

        emitted: list[QueueEntry] = []
        error_envelope: Envelope | None = None
        self.in_flight = envelope
        try:
            for agent in self._dispatch_targets(entry):
                ctx = HandlerContext(agent.name)
                try:
                    agent.handle(envelope, ctx)
                    for out in ctx.outgoing:
                        self._validate_entry(out)
                except Exception as exc:
                    error_envelope = self._record_handler_error(
                        session, agent.name, envelope, exc
                    )
                    break
                for text in ctx.thoughts:
                    thought = Thought(
                        agent=agent.name,
                        seq_anchor=envelope.seq,
                        text=text,
                        session_id=session.session_id,
                    )
                    session.thoughts.append(thought)
                    self.emit("thought-appended", {"thought": thought.to_dict()})
                for out in ctx.outgoing:
                    self.queue.append(self._stamp(out))
                emitted.extend(ctx.outgoing)
        finally:
            self.in_flight = None

        self.emit("queue-changed", {"queue": self.queue_doc()})
        if error_envelope is not None:
            return StepResult(
                status="handler-error",
                envelope=envelope,
                error_envelope=error_envelope,
                emitted=emitted,
            )
        return StepResult(status="dispatched", envelope=envelope, emitted=emitted)

    def _record_handler_error(
        self, session: Session, agent_name: str, cause: Envelope, exc: Exception
    ) -> Envelope:
        """A handler raised.  Record the failure as its own history entry so
        the trace shows where things broke, checkpointing first to keep the
        one-checkpoint-per-seq invariant, then leave the runtime paused."""
        seq = session.next_seq
        self.take_checkpoint(session.session_id, seq)
        entry = QueueEntry(
            sender=agent_name,
            recipient=USER,
            kind="handler-error",
            payload={
                "body": f"{type(exc).__name__}: {exc}",
                "failed_seq": cause.seq,
            },
        )
        envelope = self._append_envelope(session, self._stamp(entry), seq)
        self._pause_requested = True
        return envelope

    def run(self, max_steps: int | None = None, step_lock=None) -> RunReport:
        """Step until the queue drains, a pause lands, or the ceiling hits.

        When a lock is given it is taken around every boundary, so external
        control commands interleave exactly at inter-message boundaries.
        """
        ceiling = max_steps if max_steps is not None else self.default_max_steps
        lock = step_lock if step_lock is not None else contextlib.nullcontext()
        with lock:
            if self.faulted:
                raise FaultedError("runtime is faulted; restore a checkpoint first")
            self.require_paused()
            self._pause_requested = False
            self.mode = RUNNING
            self._emit_run_state()
        steps = 0
        stop_reason = "queue-empty"
        try:
            while True:
                with lock:
                    if self._pause_requested:
                        stop_reason = "paused"
                        break
                    if steps >= ceiling:
                        stop_reason = "ceiling-hit"
                        break
                    result = self._step_once()
                    if result.status == "empty-queue":
                        stop_reason = "queue-empty"
                        break
                    steps += 1
                    if result.status == "handler-error":
                        stop_reason = "handler-error"
                        break
        finally:
            with lock:
                self.mode = PAUSED
                self._pause_requested = False
                self._emit_run_state()
        return RunReport(steps=steps, stop_reason=stop_reason)

    def pause(self) -> None:
        """Ask a running loop to stop at the next message boundary."""
        if self.mode != PAUSED:
            self._pause_requested = True

    def require_paused(self) -> None:
        if self.mode != PAUSED:
            raise NotPausedError("the runtime must be paused for this operation")
