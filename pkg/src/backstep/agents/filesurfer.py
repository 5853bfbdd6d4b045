"""File-reading agent over the corpus's file store."""

from __future__ import annotations

import re

from ..messages import Envelope
from .base import Agent, HandlerContext
from .corpus import Corpus


def parse_file_request(body: str) -> str | None:
    text = body.strip()
    m = re.match(r"^read_file\s*\(\s*['\"]?([^'\")]+)['\"]?\s*\)\s*$", text)
    if m:
        return m.group(1).strip()
    m = re.search(r"\bread\s+(?:the\s+)?file\s+(\S+)", text, re.IGNORECASE)
    if m:
        return m.group(1).rstrip(".")
    return None


class FileSurferAgent(Agent):
    """Reads named files out of the corpus and reports their contents."""

    agent_type = "filesurfer"

    def __init__(self, name: str, corpus: Corpus, description: str = ""):
        self.corpus = corpus
        super().__init__(name, description=description, handled_kinds=("task",))

    def initial_state(self) -> dict:
        return {"last_file": None}

    def handle(self, envelope: Envelope, ctx: HandlerContext) -> None:
        name = parse_file_request(envelope.body)
        if name is None:
            ctx.think("No file named in the instruction")
            ctx.send(envelope.sender, "report", "I can only read files. Try: read file <name>.")
            return
        ctx.think(f"Action: read file {name}")
        contents = self.corpus.file(name)
        if contents is None:
            ctx.send(envelope.sender, "report", f"File {name} not found.")
            return
        self._state["last_file"] = name
        ctx.send(envelope.sender, "report", f"Contents of {name}:\n{contents.rstrip()}")
