"""Checkpoint records and their store.

A checkpoint captures every agent's state immediately before one message is
dispatched, keyed by (session, seq).  Restoring it puts the whole team back
exactly where it stood at that moment, which is what makes reset and edit
forks reproducible.  A checkpoint taken when execution leaves a session also
carries the pending queue, so switching back can resume mid-flight.

The store is in-memory first.  Given a directory it also persists each
checkpoint as JSON in one file per checkpoint, laid out as
``<dir>/<session>/<seq>``, and falls back to disk on a memory miss.
"""

from __future__ import annotations

import json
import shutil
import time
from dataclasses import dataclass, field
from pathlib import Path

FILE_SCHEMA_VERSION = 1


@dataclass
class AgentStateDoc:
    """One agent's captured state plus enough identity to verify fit."""

    agent: str
    agent_type: str
    content: dict
    schema_version: int = 1

    def to_dict(self) -> dict:
        return {
            "agent": self.agent,
            "type": self.agent_type,
            "schema_version": self.schema_version,
            "content": self.content,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "AgentStateDoc":
        return cls(
            agent=doc["agent"],
            agent_type=doc["type"],
            content=dict(doc["content"]),
            schema_version=int(doc.get("schema_version", 1)),
        )


@dataclass
class Checkpoint:
    session_id: str
    seq: int
    agents: dict[str, AgentStateDoc]
    queue: list[dict] | None = None
    created_at: float = field(default_factory=time.time)

    @property
    def checkpoint_id(self) -> str:
        return f"{self.session_id}:{self.seq}"

    def roster(self) -> set[tuple[str, str]]:
        return {(doc.agent, doc.agent_type) for doc in self.agents.values()}

    def to_dict(self) -> dict:
        doc = {
            "schema_version": FILE_SCHEMA_VERSION,
            "checkpoint_id": self.checkpoint_id,
            "session_id": self.session_id,
            "seq": self.seq,
            "created_at": self.created_at,
            "agents": {name: d.to_dict() for name, d in self.agents.items()},
        }
        if self.queue is not None:
            doc["queue"] = self.queue
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "Checkpoint":
        return cls(
            session_id=doc["session_id"],
            seq=doc["seq"],
            created_at=doc.get("created_at", 0.0),
            queue=doc.get("queue"),
            agents={
                name: AgentStateDoc.from_dict(entry)
                for name, entry in doc["agents"].items()
            },
        )


def parse_checkpoint_id(checkpoint_id: str) -> tuple[str, int]:
    session_id, _, seq = checkpoint_id.rpartition(":")
    return session_id, int(seq)


class CheckpointStore:
    def __init__(self, persist_dir: str | Path | None = None):
        self._mem: dict[tuple[str, int], Checkpoint] = {}
        self.persist_dir = Path(persist_dir) if persist_dir else None

    def put(self, checkpoint: Checkpoint) -> None:
        self._mem[(checkpoint.session_id, checkpoint.seq)] = checkpoint
        if self.persist_dir:
            session_dir = self.persist_dir / checkpoint.session_id
            session_dir.mkdir(parents=True, exist_ok=True)
            path = session_dir / str(checkpoint.seq)
            path.write_text(json.dumps(checkpoint.to_dict(), indent=2))

    def get(self, session_id: str, seq: int) -> Checkpoint | None:
        found = self._mem.get((session_id, seq))
        if found is not None:
            return found
        if self.persist_dir:
            path = self.persist_dir / session_id / str(seq)
            if path.is_file():
                checkpoint = Checkpoint.from_dict(json.loads(path.read_text()))
                self._mem[(session_id, seq)] = checkpoint
                return checkpoint
        return None

    def get_by_id(self, checkpoint_id: str) -> Checkpoint | None:
        session_id, seq = parse_checkpoint_id(checkpoint_id)
        return self.get(session_id, seq)

    def has(self, session_id: str, seq: int) -> bool:
        return self.get(session_id, seq) is not None

    def seqs(self, session_id: str) -> list[int]:
        found = {seq for (sid, seq) in self._mem if sid == session_id}
        if self.persist_dir:
            session_dir = self.persist_dir / session_id
            if session_dir.is_dir():
                found.update(int(p.name) for p in session_dir.iterdir() if p.name.isdigit())
        return sorted(found)

    def sessions(self) -> list[str]:
        found = {sid for (sid, _) in self._mem}
        if self.persist_dir and self.persist_dir.is_dir():
            found.update(p.name for p in self.persist_dir.iterdir() if p.is_dir())
        return sorted(found)

    def delete_session(self, session_id: str) -> int:
        keys = [k for k in self._mem if k[0] == session_id]
        count = len(set(self.seqs(session_id)) | {k[1] for k in keys})
        for key in keys:
            del self._mem[key]
        if self.persist_dir:
            session_dir = self.persist_dir / session_id
            if session_dir.is_dir():
                shutil.rmtree(session_dir)
        return count

    def gc(self, live_sessions: set[str]) -> int:
        """Prune checkpoints of sessions outside the live set; return count."""
        dead = [sid for sid in self.sessions() if sid not in live_sessions]
        return sum(self.delete_session(sid) for sid in dead)
