"""Session tree operations: reset, edit, switching, verdicts, export.

Resetting never rewrites a session in place.  It forks a child that owns the
new suffix, restores the team from the checkpoint taken just before the
target message, and re-enqueues that message (verbatim for a plain reset,
with replacement content for an edit).  The parent stays exactly as it was,
so every branch ever explored remains inspectable and comparable.

Whenever execution leaves a session (fork or explicit switch), the team
state and pending queue are frozen in a checkpoint at that session's
next_seq.  Switching back restores both, so the old branch resumes exactly
where it stopped.
"""

from __future__ import annotations

import re
import time
from dataclasses import dataclass

from .errors import (
    EditViolationError,
    NoCheckpointError,
    SessionDeleteError,
)
from .messages import Provenance, QueueEntry
from .runtime import Runtime, Session

PASS = "pass"
FAIL = "fail"
UNKNOWN = "unknown"

FINAL_ANSWER_KIND = "final-answer"


def normalize_answer(text: str) -> str:
    """Case, surrounding space, and internal runs of whitespace are not
    meaningful when comparing answers."""
    return re.sub(r"\s+", " ", text.strip()).casefold()


@dataclass
class Verdict:
    session_id: str
    status: str  # "pass" | "fail" | "unknown"
    expected: str | None
    actual: str | None

    def to_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "status": self.status,
            "expected": self.expected,
            "actual": self.actual,
        }


class SessionManager:
    """Owns the fork tree semantics on top of a Runtime."""

    def __init__(self, runtime: Runtime, expected_answer: str | None = None):
        self.runtime = runtime
        self.expected_answer = expected_answer

    def watch_final_answers(self) -> None:
        """Re-evaluate a session's verdict whenever it gains a final answer.

        Call after any event listeners that must observe events in commit
        order have been registered; evaluation emits follow-up events.
        """
        def listener(name: str, data: dict) -> None:
            if name == "message-appended" and data["envelope"]["kind"] == FINAL_ANSWER_KIND:
                self.evaluate(data["envelope"]["session_id"])

        self.runtime.on_event(listener)

    # -- seeding ------------------------------------------------------------

    def seed_task(
        self,
        recipient: str,
        body: str,
        kind: str = "task",
        sender: str = "user",
        provenance: Provenance = Provenance.ORIGINAL,
    ) -> QueueEntry:
        """Queue the opening task and remember it as the root's seed so an
        export can say how the whole tree started."""
        entry = self.runtime.enqueue(sender, recipient, kind, body, provenance)
        root = self.runtime.lineage(self.runtime.active_session_id)[0]
        if root.seed is None:
            root.seed = entry.to_dict()
        return entry

    # -- forking ------------------------------------------------------------

    def _fork(
        self,
        session_id: str,
        seq: int,
        payload: dict,
        provenance: Provenance,
        label: str | None,
    ) -> Session:
        runtime = self.runtime
        runtime.require_paused()
        original = runtime.find_envelope(session_id, seq)
        checkpoint = runtime.resolve_checkpoint(session_id, seq)

        # Freeze the branch being left behind, queue included, so it can be
        # resumed in place later.
        leaving = runtime.active_session
        runtime.take_checkpoint(leaving.session_id, leaving.next_seq, include_queue=True)

        child = runtime.new_session(session_id, seq, label=label)
        runtime.restore_checkpoint(checkpoint)
        runtime.clear_queue()
        entry = runtime.enqueue(
            sender=original.sender,
            recipient=original.recipient,
            kind=original.kind,
            payload=payload,
            provenance=provenance,
        )
        child.seed = entry.to_dict()
        runtime.set_active_session(child.session_id)
        return child

    def reset_at(self, session_id: str, seq: int, label: str | None = None) -> Session:
        """Fork at a message and re-dispatch it unchanged."""
        original = self.runtime.find_envelope(session_id, seq)
        return self._fork(
            session_id,
            seq,
            payload=dict(original.payload),
            provenance=Provenance.ORIGINAL,
            label=label or f"reset@{seq}",
        )

    def edit_and_reset(
        self, session_id: str, seq: int, new_payload: dict | str, label: str | None = None
    ) -> Session:
        """Fork at a message and re-dispatch it with replacement content.

        Only the payload may change; sender, recipient, and kind are fixed
        by the original envelope.
        """
        if isinstance(new_payload, str):
            new_payload = {"body": new_payload}
        body = new_payload.get("body")
        if not isinstance(body, str) or not body.strip():
            raise EditViolationError("an edited message needs a non-empty body")
        return self._fork(
            session_id,
            seq,
            payload=dict(new_payload),
            provenance=Provenance.EDITED,
            label=label or f"edit@{seq}",
        )

    # -- switching and deleting ----------------------------------------------

    def set_active(self, session_id: str) -> Session:
        """Resume a previously-left branch in place.

        Works only for sessions that were frozen with a terminal checkpoint
        when execution moved away from them (forking does this).
        """
        runtime = self.runtime
        runtime.require_paused()
        target = runtime.session(session_id)
        if session_id == runtime.active_session_id:
            return target
        checkpoint = runtime.store.get(session_id, target.next_seq)
        if checkpoint is None:
            raise NoCheckpointError(
                f"session '{session_id}' has no resume point; reset at one of "
                f"its messages instead",
                {"session_id": session_id},
            )
        leaving = runtime.active_session
        runtime.take_checkpoint(leaving.session_id, leaving.next_seq, include_queue=True)
        runtime.restore_checkpoint(checkpoint)
        runtime.load_queue([QueueEntry.from_dict(doc) for doc in checkpoint.queue or []])
        runtime.set_active_session(session_id)
        return target

    def delete_session(self, session_id: str) -> int:
        """Remove a leaf branch nobody is using; returns checkpoints pruned."""
        runtime = self.runtime
        runtime.session(session_id)  # existence check
        if session_id == runtime.active_session_id:
            raise SessionDeleteError("cannot delete the active session")
        children = [s for s in runtime.sessions.values() if s.parent_id == session_id]
        if children:
            raise SessionDeleteError(
                f"session '{session_id}' has children: "
                + ", ".join(s.session_id for s in children)
            )
        del runtime.sessions[session_id]
        return runtime.store.gc(set(runtime.sessions))

    def list_sessions(self) -> list[dict]:
        """All sessions in creation order (parents always precede children)."""
        docs = []
        for session in self.runtime.sessions.values():
            self.evaluate(session.session_id)
            doc = session.to_dict()
            doc["active"] = session.session_id == self.runtime.active_session_id
            docs.append(doc)
        return docs

    # -- verdicts -------------------------------------------------------------

    def evaluate(self, session_id: str, expected: str | None = None) -> Verdict:
        """Compare the branch's last final answer against the expected one.

        The verdict is stored on the session; a change is announced.
        """
        expected = expected if expected is not None else self.expected_answer
        actual = None
        for item in self.runtime.history(session_id):
            if item.envelope.kind == FINAL_ANSWER_KIND:
                actual = item.envelope.body
        if actual is None or expected is None:
            verdict = Verdict(session_id, UNKNOWN, expected, actual)
        else:
            matched = normalize_answer(actual) == normalize_answer(expected)
            verdict = Verdict(session_id, PASS if matched else FAIL, expected, actual)
        session = self.runtime.session(session_id)
        doc = verdict.to_dict()
        if session.verdict != doc:
            session.verdict = doc
            self.runtime.emit("verdict-changed", {"verdict": doc})
        return verdict

    # -- export ---------------------------------------------------------------

    def export_session(self, session_id: str, team_meta: dict | None = None) -> dict:
        """A replayable record of one branch: the fork chain that produced it
        plus its full message view."""
        runtime = self.runtime
        chain = runtime.lineage(session_id)
        return {
            "schema_version": 1,
            "exported_at": time.time(),
            "team": dict(team_meta or {}),
            "expected_answer": self.expected_answer,
            "session_id": session_id,
            "sessions": [
                {
                    "session_id": s.session_id,
                    "parent_id": s.parent_id,
                    "fork_seq": None if s.parent_id is None else s.fork_seq,
                    "label": s.label,
                    "seed": s.seed,
                }
                for s in chain
            ],
            "history": [item.to_dict() for item in runtime.history(session_id)],
            "thoughts": [
                dict(thought.to_dict(), inherited=inherited)
                for thought, inherited in runtime.thoughts(session_id)
            ],
            "verdict": self.evaluate(session_id).to_dict(),
        }
