"""Error types raised by the runtime, checkpoint store, sessions, and agents.

Every error carries a short machine-readable ``code`` so the HTTP layer can
map it to a structured body without string matching.
"""

from __future__ import annotations


class BackstepError(Exception):
    """Base class for all library errors."""

    code = "error"

    def __init__(self, message: str, detail: dict | None = None):
        super().__init__(message)
        self.message = message
        self.detail = detail or {}


class UnknownAgentError(BackstepError):
    code = "unknown-agent"


class DuplicateAgentError(BackstepError):
    code = "duplicate-agent"


class NotPausedError(BackstepError):
    """A control operation requires the runtime to be paused."""

    code = "not-paused"


class FaultedError(BackstepError):
    """The runtime is in a faulted-paused state after a failed restore."""

    code = "faulted"


class UnknownSessionError(BackstepError):
    code = "unknown-session"


class UnknownSeqError(BackstepError):
    code = "unknown-seq"


class NoCheckpointError(BackstepError):
    code = "no-checkpoint"


class RosterMismatchError(BackstepError):
    """Restore attempted against a team roster that no longer matches."""

    code = "roster-mismatch"


class SnapshotError(BackstepError):
    """An agent's save_state failed; the dispatch was aborted."""

    code = "snapshot-failed"


class RestoreError(BackstepError):
    """An agent's load_state failed; the runtime is faulted until a
    successful restore or team reload."""

    code = "restore-failed"


class EditViolationError(BackstepError):
    """An edit tried to change routing metadata or supplied an empty body."""

    code = "edit-violation"


class ConfigError(BackstepError):
    """A configuration document failed schema validation."""

    code = "config-invalid"

    def __init__(self, message: str, keys: list[str] | None = None):
        super().__init__(message, {"keys": keys or []})
        self.keys = keys or []


class UnknownDimensionError(BackstepError):
    code = "unknown-dimension"


class SessionDeleteError(BackstepError):
    """Only leaf, non-active sessions may be deleted."""

    code = "session-delete"


class StaleSessionError(BackstepError):
    """A mutation carried an expected active session that no longer holds."""

    code = "stale-session"


class TeamFileError(BackstepError):
    """A team file, script file, or corpus document failed to load."""

    code = "team-file"


class ScriptError(BackstepError):
    """A script document is malformed."""

    code = "script-invalid"


class ExportError(BackstepError):
    """An export document is malformed or has an unsupported version."""

    code = "export-invalid"
