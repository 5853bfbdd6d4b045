"""Message records shared by the runtime, stores, and the HTTP layer.

An Envelope is a delivered message: it has a sequence number and lives in a
session's history.  A QueueEntry is a message that has been sent but not yet
dispatched; it has no sequence number until the moment of dispatch.  Thoughts
are agent-internal notes anchored to the envelope whose handling produced
them; they are logged and displayed but never delivered to anyone.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from enum import Enum

# Reserved recipient names.  BROADCAST fans out to every registered agent
# that handles the message kind.  USER is a sink: envelopes addressed to it
# are recorded in history but never dispatched.
BROADCAST = "broadcast"
USER = "user"

RESERVED_NAMES = frozenset({BROADCAST, USER})


class Provenance(str, Enum):
    """How a message came to exist."""

    ORIGINAL = "original"        # emitted by an agent, or part of the scripted task
    USER_INJECTED = "user-injected"  # typed in through the send panel / API
    EDITED = "edited"            # rewritten during an edit-and-reset


@dataclass
class Envelope:
    """A dispatched message, fixed in a session's history."""

    message_id: str
    seq: int
    session_id: str
    sender: str
    recipient: str
    kind: str
    payload: dict
    provenance: Provenance = Provenance.ORIGINAL
    timestamp: float = field(default_factory=time.time)

    @property
    def body(self) -> str:
        return str(self.payload.get("body", ""))

    def to_dict(self) -> dict:
        return {
            "message_id": self.message_id,
            "seq": self.seq,
            "session_id": self.session_id,
            "sender": self.sender,
            "recipient": self.recipient,
            "kind": self.kind,
            "payload": dict(self.payload),
            "provenance": self.provenance.value,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Envelope":
        return cls(
            message_id=doc["message_id"],
            seq=doc["seq"],
            session_id=doc["session_id"],
            sender=doc["sender"],
            recipient=doc["recipient"],
            kind=doc["kind"],
            payload=dict(doc["payload"]),
            provenance=Provenance(doc.get("provenance", "original")),
            timestamp=doc.get("timestamp", 0.0),
        )


@dataclass
class Thought:
    """An agent-internal note.  Never delivered, only logged."""

    agent: str
    seq_anchor: int
    text: str
    session_id: str
    timestamp: float = field(default_factory=time.time)

    def to_dict(self) -> dict:
        return {
            "agent": self.agent,
            "seq_anchor": self.seq_anchor,
            "text": self.text,
            "session_id": self.session_id,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Thought":
        return cls(
            agent=doc["agent"],
            seq_anchor=doc["seq_anchor"],
            text=doc["text"],
            session_id=doc["session_id"],
            timestamp=doc.get("timestamp", 0.0),
        )


@dataclass
class QueueEntry:
    """A sent-but-not-yet-dispatched message.  Gains a seq at dispatch;
    until then its position is fixed by enqueue_order (FIFO)."""

    sender: str
    recipient: str
    kind: str
    payload: dict
    provenance: Provenance = Provenance.ORIGINAL
    enqueue_order: int = 0

    def to_dict(self) -> dict:
        return {
            "sender": self.sender,
            "recipient": self.recipient,
            "kind": self.kind,
            "payload": dict(self.payload),
            "provenance": self.provenance.value,
            "enqueue_order": self.enqueue_order,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "QueueEntry":
        return cls(
            sender=doc["sender"],
            recipient=doc["recipient"],
            kind=doc["kind"],
            payload=dict(doc["payload"]),
            provenance=Provenance(doc.get("provenance", "original")),
            enqueue_order=doc.get("enqueue_order", 0),
        )


@dataclass
class HistoryItem:
    """An envelope as seen from a particular session.

    ``inherited`` is true when the envelope belongs to an ancestor's prefix
    (its seq is below this session's fork point), so viewers can render it
    with reduced emphasis.
    """

    envelope: Envelope
    inherited: bool

    def to_dict(self) -> dict:
        doc = self.envelope.to_dict()
        doc["inherited"] = self.inherited
        return doc
