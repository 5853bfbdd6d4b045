"""Offline document corpus backing the browsing and file-reading agents.

Pages are YAML documents with free text lines and named tables; files are
plain text.  Keeping the corpus on disk and immutable means agent state can
stay tiny: a browsing agent checkpoints which page and which sort order it
was looking at, and the actual rows are re-derived from here on restore.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from ..errors import TeamFileError


@dataclass
class Table:
    name: str
    columns: list[str]
    rows: list[list]

    def sorted_rows(self, column: str, descending: bool = True) -> list[list]:
        if column not in self.columns:
            raise KeyError(column)
        idx = self.columns.index(column)
        return sorted(self.rows, key=lambda r: r[idx], reverse=descending)

    def row_doc(self, row: list) -> str:
        return ", ".join(f"{c}={v}" for c, v in zip(self.columns, row))


@dataclass
class Page:
    url: str
    title: str
    text: list[str] = field(default_factory=list)
    tables: dict[str, Table] = field(default_factory=dict)

    @classmethod
    def from_doc(cls, doc: dict, origin: str = "<page>") -> "Page":
        if not isinstance(doc, dict) or "url" not in doc:
            raise TeamFileError(f"{origin}: page document needs a 'url'")
        tables = {}
        for name, spec in (doc.get("tables") or {}).items():
            if not isinstance(spec, dict) or "columns" not in spec or "rows" not in spec:
                raise TeamFileError(f"{origin}: table '{name}' needs columns and rows")
            cols = list(spec["columns"])
            rows = [list(r) for r in spec["rows"]]
            for r in rows:
                if len(r) != len(cols):
                    raise TeamFileError(
                        f"{origin}: table '{name}' row {r} does not match columns"
                    )
            tables[name] = Table(name=name, columns=cols, rows=rows)
        return cls(
            url=str(doc["url"]),
            title=str(doc.get("title", doc["url"])),
            text=[str(line) for line in (doc.get("text") or [])],
            tables=tables,
        )


class Corpus:
    """All pages and files a team can see, loaded once at team build time."""

    def __init__(self, pages: dict[str, Page] | None = None, files: dict[str, str] | None = None):
        self.pages = pages or {}
        self.files = files or {}

    @classmethod
    def load(cls, root: Path) -> "Corpus":
        pages: dict[str, Page] = {}
        files: dict[str, str] = {}
        pages_dir = root / "pages"
        if pages_dir.is_dir():
            for path in sorted(pages_dir.glob("*.yaml")):
                with open(path) as fh:
                    doc = yaml.safe_load(fh)
                page = Page.from_doc(doc, origin=str(path))
                pages[page.url] = page
        files_dir = root / "files"
        if files_dir.is_dir():
            for path in sorted(files_dir.iterdir()):
                if path.is_file():
                    files[path.name] = path.read_text()
        return cls(pages=pages, files=files)

    def page(self, url: str) -> Page | None:
        return self.pages.get(url)

    def file(self, name: str) -> str | None:
        return self.files.get(name)
