"""Deterministic CSV/JSON serialization of command results.

Floats are written with 17 significant digits and nothing time-dependent enters the
files, so identical configurations give byte-identical output.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

__all__ = ["SCHEMA", "OutputRecord", "format_scalar", "to_json_text"]

SCHEMA = "capillary-asym/1"


def format_scalar(x: Any) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return format(x, ".17g")
    if x is None:
        return ""
    return str(x)


def _json(x: Any, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(x, bool) or x is None:
        return {True: "true", False: "false", None: "null"}[x]
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        return format(x, ".17g") if math.isfinite(x) else "null"
    if isinstance(x, str):
        return _json_string(x)
    if isinstance(x, Mapping):
        if not x:
            return "{}"
        items = [f"{pad}{_json_string(str(k))}: {_json(v, indent, level + 1)}" for k, v in x.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(x, (list, tuple)):
        # rows stay on one line each
        if all(not isinstance(v, (list, tuple, Mapping)) for v in x):
            return "[" + ", ".join(_json(v, indent, level + 1) for v in x) + "]"
        if not x:
            return "[]"
        return "[\n" + ",\n".join(pad + _json(v, indent, level + 1) for v in x) + "\n" + end + "]"
    if hasattr(x, "item"):
        return _json(x.item(), indent, level)
    raise TypeError(f"cannot serialize {type(x).__name__}")


def _json_string(s: str) -> str:
    return json.dumps(s, ensure_ascii=True)


def to_json_text(x: Any, indent: int = 2) -> str:
    return _json(x, indent, 0) + "\n"


@dataclass
class OutputRecord:
    command: str
    config: dict[str, Any]
    columns: tuple[str, ...]
    rows: list[tuple[Any, ...]]
    summary: dict[str, Any] = field(default_factory=dict)
    diagnostics: dict[str, Any] = field(default_factory=dict)
    schema: str = SCHEMA

    def __post_init__(self) -> None:
        for r in self.rows:
            if len(r) != len(self.columns):
                raise ValueError(f"row width {len(r)} does not match {len(self.columns)} columns")

    def _comment_value(self, v: Any) -> str:
        if isinstance(v, (list, tuple, Mapping)):
            return to_json_text(v, indent=0).replace("\n", "")
        return format_scalar(v)

    def to_csv(self) -> str:
        lines = [f"# schema={self.schema}", ",".join(self.columns)]
        lines += [",".join(format_scalar(v) for v in r) for r in self.rows]
        lines.append(f"# command={self.command}")
        for block, d in (("config", self.config), ("summary", self.summary), ("diagnostics", self.diagnostics)):
            for k, v in d.items():
                lines.append(f"# {block}.{k}={self._comment_value(v)}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return to_json_text(
            {
                "schema": self.schema,
                "command": self.command,
                "config": self.config,
                "columns": list(self.columns),
                "rows": [list(r) for r in self.rows],
                "summary": self.summary,
                "diagnostics": self.diagnostics,
            }
        )

    def render(self, fmt: str) -> str:
        if fmt == "csv":
            return self.to_csv()
        if fmt == "json":
            return self.to_json()
        raise ValueError(f"unknown format {fmt!r}")

    def write(self, path: str | Path, fmt: str) -> None:
        Path(path).write_bytes(self.render(fmt).encode("utf-8"))
