"""Deterministic JSON with fixed float formatting.

Reports, plans, and solutions are emitted through one writer so repeated
runs produce byte-identical files: floats are always rendered with
%.17g (exact round trip for IEEE doubles), keys keep insertion order,
and non-finite numbers are rejected instead of leaking "NaN" into a file
another tool cannot parse.
"""

from __future__ import annotations

import json
import math
from typing import Any

__all__ = ["dumps_canonical", "format_float"]


def format_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"non-finite value in output: {x}")
    return "%.17g" % x


def _render(obj: Any, indent: int) -> str:
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return format_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [_render(v, indent + 1) for v in obj]
        return "[\n" + ",\n".join(inner + s for s in items) + "\n" + pad + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [
            json.dumps(str(k)) + ": " + _render(v, indent + 1)
            for k, v in obj.items()
        ]
        return "{\n" + ",\n".join(inner + s for s in items) + "\n" + pad + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_canonical(obj: Any) -> str:
    """Render to deterministic JSON text (trailing newline included)."""
    return _render(obj, 0) + "\n"
