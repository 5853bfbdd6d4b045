"""Agent base class, handler context, and config schema validation.

Agents are synchronous: the runtime calls ``handle`` with the envelope being
dispatched and a context object.  Everything the handler wants to say goes
through the context — ``send`` queues an outgoing message, ``think`` records
an internal note.  State capture uses ``save_state``/``load_state`` with
plain JSON-serializable dicts; configuration uses ``get_config``/
``set_config`` validated against a per-agent schema.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field

from ..errors import ConfigError
from ..messages import Envelope, Provenance, QueueEntry


@dataclass
class ConfigField:
    """Schema entry for one config key."""

    name: str
    type: type
    description: str = ""
    minimum: float | None = None
    maximum: float | None = None

    def validate(self, value) -> None:
        if self.type is float and isinstance(value, int) and not isinstance(value, bool):
            value = float(value)
        if not isinstance(value, self.type) or isinstance(value, bool) and self.type is not bool:
            raise ConfigError(
                f"config key '{self.name}' expects {self.type.__name__}, "
                f"got {type(value).__name__}",
                keys=[self.name],
            )
        if self.minimum is not None and value < self.minimum:
            raise ConfigError(
                f"config key '{self.name}' must be >= {self.minimum}", keys=[self.name]
            )
        if self.maximum is not None and value > self.maximum:
            raise ConfigError(
                f"config key '{self.name}' must be <= {self.maximum}", keys=[self.name]
            )


@dataclass
class AgentDescriptor:
    """Registry card for one agent: identity, what it accepts, and its
    current configuration with the schema a form can be rendered from."""

    name: str
    agent_type: str
    description: str = ""
    handled_kinds: tuple[str, ...] = ()
    config: dict = field(default_factory=dict)
    config_schema: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "type": self.agent_type,
            "description": self.description,
            "handled_kinds": list(self.handled_kinds),
            "config": dict(self.config),
            "config_schema": list(self.config_schema),
        }


class HandlerContext:
    """Collects the outputs of a single handle() call.

    The runtime drains ``outgoing`` onto the queue tail in emission order and
    records ``thoughts`` anchored at the envelope being handled.
    """

    def __init__(self, agent_name: str):
        self.agent_name = agent_name
        self.outgoing: list[QueueEntry] = []
        self.thoughts: list[str] = []

    def send(self, recipient: str, kind: str, body: str = "", payload: dict | None = None) -> None:
        doc = dict(payload) if payload else {}
        if body or "body" not in doc:
            doc["body"] = body
        self.outgoing.append(
            QueueEntry(
                sender=self.agent_name,
                recipient=recipient,
                kind=kind,
                payload=doc,
                provenance=Provenance.ORIGINAL,
            )
        )

    def think(self, text: str) -> None:
        self.thoughts.append(text)


class Agent:
    """Base agent.  Subclasses implement handle(); the state and config
    plumbing here suits agents whose whole state is one dict."""

    agent_type = "base"
    config_schema: tuple[ConfigField, ...] = ()

    def __init__(self, name: str, description: str = "", handled_kinds: tuple[str, ...] = ()):
        self.name = name
        self.description = description
        self.handled_kinds = tuple(handled_kinds)
        self._state: dict = self.initial_state()
        self._config: dict = self.default_config()

    # -- identity ---------------------------------------------------------

    def descriptor(self) -> AgentDescriptor:
        return AgentDescriptor(
            name=self.name,
            agent_type=self.agent_type,
            description=self.description,
            handled_kinds=self.handled_kinds,
            config=self.get_config(),
            config_schema=self.config_schema_doc(),
        )

    def handles(self, kind: str) -> bool:
        return not self.handled_kinds or kind in self.handled_kinds

    # -- behaviour --------------------------------------------------------

    def handle(self, envelope: Envelope, ctx: HandlerContext) -> None:
        raise NotImplementedError

    # -- state ------------------------------------------------------------

    def initial_state(self) -> dict:
        return {}

    def save_state(self) -> dict:
        return copy.deepcopy(self._state)

    def load_state(self, state: dict) -> None:
        self._state = copy.deepcopy(state)

    # -- config -----------------------------------------------------------

    def default_config(self) -> dict:
        return {}

    def get_config(self) -> dict:
        return copy.deepcopy(self._config)

    def set_config(self, config: dict) -> None:
        schema = {f.name: f for f in self.config_schema}
        unknown = [k for k in config if k not in schema]
        if unknown:
            raise ConfigError(
                f"unknown config keys for agent '{self.name}': {', '.join(sorted(unknown))}",
                keys=sorted(unknown),
            )
        for key, value in config.items():
            schema[key].validate(value)
        merged = self.get_config()
        merged.update(copy.deepcopy(config))
        self._config = merged

    def config_schema_doc(self) -> list[dict]:
        names = {str: "text", float: "number", int: "integer", bool: "flag"}
        return [
            {
                "name": f.name,
                "type": names.get(f.type, f.type.__name__),
                "description": f.description,
                "minimum": f.minimum,
                "maximum": f.maximum,
            }
            for f in self.config_schema
        ]


class UserProxyAgent(Agent):
    """Hidden sink standing in for the human user.

    Registering it makes "user" a routable recipient, so agents can reply to
    whoever messaged them without special cases.  It never emits anything
    and is excluded from team listings.
    """

    agent_type = "user-proxy"

    def __init__(self, name: str = "user"):
        super().__init__(name, description="The human on the other side of the session.")

    def handle(self, envelope: Envelope, ctx: HandlerContext) -> None:
        pass
