"""Multi-agent message runtime with built-in time-travel debugging.

Every dispatch is checkpointed before its handler runs, so any point in a
conversation can be re-entered: pause, step, inject, edit a past message, or
reset to it, forking a new session while the original stays comparable.  An
HTTP service exposes the whole thing for interactive frontends.
"""

from .checkpoints import AgentStateDoc, Checkpoint, CheckpointStore
from .errors import BackstepError
from .messages import BROADCAST, USER, Envelope, Provenance, QueueEntry, Thought
from .overview import OverviewBuilder, build_overview
from .runtime import RunReport, RunState, Runtime, Session, StepResult
from .sessions import SessionManager, Verdict, normalize_answer
from .replay import canonical_export, diff_exports, replay_export, replay_file
from .service import create_app
from .teamfile import (
    TeamSpec,
    apply_edit,
    build_team,
    list_fixture_teams,
    load_team,
    seed_task,
)

__version__ = "0.1.0"

__all__ = [
    "AgentStateDoc",
    "apply_edit",
    "BackstepError",
    "BROADCAST",
    "build_overview",
    "build_team",
    "canonical_export",
    "Checkpoint",
    "CheckpointStore",
    "create_app",
    "diff_exports",
    "Envelope",
    "list_fixture_teams",
    "load_team",
    "normalize_answer",
    "OverviewBuilder",
    "Provenance",
    "QueueEntry",
    "replay_export",
    "replay_file",
    "RunReport",
    "RunState",
    "Runtime",
    "Session",
    "SessionManager",
    "seed_task",
    "StepResult",
    "TeamSpec",
    "Thought",
    "USER",
    "Verdict",
]
