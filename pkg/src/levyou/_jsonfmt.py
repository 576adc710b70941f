"""Deterministic JSON emission with 17-significant-digit floats.

The stdlib encoder prints floats via repr (shortest round-trip); numeric
artifacts here are pinned to 17 significant digits instead so that emitted
files are byte-identical across platforms and re-runs.  Dict insertion order
is preserved (or sorted on request), numpy scalars and arrays are accepted,
and non-finite floats become the strings "inf"/"-inf"/"nan" since strict
JSON has no token for them.
"""

from __future__ import annotations

import json
import math

import numpy as np

__all__ = ["dumps", "dump"]


def _format_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return f"{x:.17g}"


def _encode(obj, indent: int, level: int, sort_keys: bool) -> str:
    pad = " " * (indent * (level + 1))
    end_pad = " " * (indent * level)
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _format_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        return _encode(obj.tolist(), indent, level, sort_keys)
    if isinstance(obj, dict):
        items = sorted(obj.items()) if sort_keys else obj.items()
        parts = [f"{pad}{json.dumps(str(k))}: "
                 f"{_encode(v, indent, level + 1, sort_keys)}"
                 for k, v in items]
        if not parts:
            return "{}"
        return "{\n" + ",\n".join(parts) + f"\n{end_pad}}}"
    if isinstance(obj, (list, tuple)):
        parts = [f"{pad}{_encode(v, indent, level + 1, sort_keys)}"
                 for v in obj]
        if not parts:
            return "[]"
        return "[\n" + ",\n".join(parts) + f"\n{end_pad}]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 2, sort_keys: bool = False) -> str:
    """Serialize to a JSON string ending in a newline."""
    return _encode(obj, indent, 0, sort_keys) + "\n"


def dump(obj, path, indent: int = 2, sort_keys: bool = False) -> None:
    with open(path, "w") as fh:
        fh.write(dumps(obj, indent=indent, sort_keys=sort_keys))
