"""Compact overview of every session for at-a-glance comparison.

Each session becomes a column of cells, one cell per message in that
session's view.  Cells carry a small color index keyed on one dimension of
the message (kind, sender, or recipient) so a viewer can spot where two
branches start to differ; inherited prefix cells are marked so they can be
drawn dimmed, the fork position is exposed for a divider line, and each
column ends with the branch's verdict.

Color keys are first-seen-order integers and must not change for a value
once assigned, so a builder instance keeps one palette per dimension for
its whole lifetime.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import UnknownDimensionError
from .messages import Provenance
from .runtime import Runtime
from .sessions import SessionManager

DIMENSIONS = ("kind", "sender", "recipient")


class ColorIndex:
    """Stable small integers for dimension values, in first-seen order."""

    def __init__(self):
        self._indexes: dict[str, int] = {}

    def index(self, value: str) -> int:
        if value not in self._indexes:
            self._indexes[value] = len(self._indexes)
        return self._indexes[value]

    def palette(self) -> dict[str, int]:
        return dict(self._indexes)


@dataclass
class OverviewCell:
    seq: int
    message_id: str
    color: int
    value: str
    inherited: bool
    edited: bool
    kind: str
    sender: str
    recipient: str

    def to_dict(self) -> dict:
        return {
            "seq": self.seq,
            "message_id": self.message_id,
            "color": self.color,
            "value": self.value,
            "inherited": self.inherited,
            "edited": self.edited,
            "kind": self.kind,
            "sender": self.sender,
            "recipient": self.recipient,
        }


@dataclass
class OverviewColumn:
    session_id: str
    parent_id: str | None
    fork_seq: int | None
    label: str | None
    active: bool
    verdict: str
    cells: list[OverviewCell] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "parent_id": self.parent_id,
            "fork_seq": self.fork_seq,
            "label": self.label,
            "active": self.active,
            "verdict": self.verdict,
            "cells": [cell.to_dict() for cell in self.cells],
        }


def color_index(values: list[str]) -> ColorIndex:
    """Build a palette from values in order."""
    idx = ColorIndex()
    for value in values:
        idx.index(value)
    return idx


class OverviewBuilder:
    """Derives overview documents; owns the per-dimension palettes."""

    def __init__(self, runtime: Runtime, manager: SessionManager):
        self.runtime = runtime
        self.manager = manager
        self._palettes = {dim: ColorIndex() for dim in DIMENSIONS}

    def build(self, dimension: str = "kind", session_ids: list[str] | None = None) -> dict:
        """Columns for the requested sessions (default: all, creation order)."""
        if dimension not in DIMENSIONS:
            raise UnknownDimensionError(
                f"unknown color dimension '{dimension}'; "
                f"expected one of {', '.join(DIMENSIONS)}"
            )
        runtime = self.runtime
        ids = session_ids if session_ids is not None else list(runtime.sessions)
        palette = self._palettes[dimension]
        columns = []
        for session_id in ids:
            session = runtime.session(session_id)
            column = OverviewColumn(
                session_id=session.session_id,
                parent_id=session.parent_id,
                fork_seq=None if session.parent_id is None else session.fork_seq,
                label=session.label,
                active=session.session_id == runtime.active_session_id,
                verdict=self.manager.evaluate(session_id).status,
            )
            for item in runtime.history(session_id):
                env = item.envelope
                value = getattr(env, dimension)
                column.cells.append(
                    OverviewCell(
                        seq=env.seq,
                        message_id=env.message_id,
                        color=palette.index(value),
                        value=value,
                        inherited=item.inherited,
                        edited=env.provenance == Provenance.EDITED,
                        kind=env.kind,
                        sender=env.sender,
                        recipient=env.recipient,
                    )
                )
            columns.append(column)
        return {
            "dimension": dimension,
            "palette": palette.palette(),
            "columns": [column.to_dict() for column in columns],
        }


def build_overview(
    runtime: Runtime,
    manager: SessionManager,
    dimension: str = "kind",
    session_ids: list[str] | None = None,
) -> dict:
    """One-off overview with a fresh palette; long-lived callers should hold
    an OverviewBuilder so color keys stay stable across rebuilds."""
    return OverviewBuilder(runtime, manager).build(dimension, session_ids)
