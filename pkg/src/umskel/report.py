"""Canonical report emission: deterministic JSON and CSV."""

from __future__ import annotations

import json
import math

from .errors import ArgumentError, UmskelError


def format_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def canonical_json(obj, indent: int = 0) -> str:
    """Sorted keys, 17-significant-digit floats, non-finite values as strings."""
    pad = " " * indent
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, (int,)) and not isinstance(obj, bool):
        return str(obj)
    if isinstance(obj, float):
        return format_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        items = []
        for k in sorted(obj, key=str):
            items.append(f'{json.dumps(str(k))}: {canonical_json(obj[k], indent)}')
        return "{" + ", ".join(items) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(canonical_json(v, indent) for v in obj) + "]"
    if hasattr(obj, "to_jsonable"):
        return canonical_json(obj.to_jsonable(), indent)
    if hasattr(obj, "item"):  # numpy scalars
        return canonical_json(obj.item(), indent)
    raise ArgumentError(f"cannot serialize {type(obj).__name__}")


def _cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        s = format_float(v)
        return s.strip('"')
    if v is None:
        return ""
    return str(v)


def to_csv(rows: list[dict]) -> str:
    if not rows:
        return "\n"
    keys = sorted({k for row in rows for k in row})
    lines = [",".join(keys)]
    for row in rows:
        lines.append(",".join(_cell(row.get(k)) for k in keys))
    return "\n".join(lines) + "\n"


def emit_report(result, format: str = "json", path: str | None = None) -> str:
    """Render and optionally write a report; returns the rendered text."""
    if format == "json":
        text = canonical_json(result) + "\n"
    elif format == "csv":
        if not isinstance(result, list):
            raise ArgumentError("csv output needs a list of row dicts")
        text = to_csv(result)
    else:
        raise ArgumentError(f"unknown format {format!r}; use json or csv")
    if path is not None:
        try:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise UmskelError(f"cannot write report to {path}: {exc}", path=path)
    return text
