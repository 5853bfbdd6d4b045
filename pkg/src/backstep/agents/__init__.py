"""Agent implementations and the type registry used by team files."""

from .base import Agent, AgentDescriptor, ConfigField, HandlerContext
from .corpus import Corpus, Page, Table
from .executor import ExecutorAgent
from .filesurfer import FileSurferAgent
from .llm import CannedBackend, CompletionBackend, LlmAgent, context_key
from .script import Rule, Script, ScriptedAgent
from .websurfer import WebSurferAgent

# Agent types a team file may declare.  Each entry builds an agent from its
# team-file spec; scripted agents also need their script loaded first.
AGENT_TYPES = ("scripted", "websurfer", "executor", "filesurfer", "llm")

__all__ = [
    "Agent",
    "AgentDescriptor",
    "AGENT_TYPES",
    "CannedBackend",
    "CompletionBackend",
    "ConfigField",
    "Corpus",
    "ExecutorAgent",
    "FileSurferAgent",
    "HandlerContext",
    "LlmAgent",
    "Page",
    "Rule",
    "Script",
    "ScriptedAgent",
    "Table",
    "WebSurferAgent",
    "context_key",
]
