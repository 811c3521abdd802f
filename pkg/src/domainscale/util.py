"""Small shared helpers: deterministic serialization and name slugging."""

from __future__ import annotations

import json
import math
import re
from pathlib import Path


def json_ready(obj):
    """Recursively convert an object into something json.dump can serialize
    deterministically: numpy scalars become Python floats/ints, NaN becomes
    None, dicts keep their insertion order."""
    if obj is None or isinstance(obj, (str, bool, int)):
        return obj
    if isinstance(obj, float):
        return None if math.isnan(obj) else obj
    if hasattr(obj, "ndim"):  # numpy array or scalar
        return json_ready(obj.tolist()) if obj.ndim else json_ready(obj.item())
    if hasattr(obj, "item"):  # other numpy scalar types
        return json_ready(obj.item())
    if isinstance(obj, dict):
        return {str(k): json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [json_ready(v) for v in obj]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_json(path: str | Path, obj) -> None:
    """Write JSON with a fixed layout so identical inputs give identical bytes."""
    text = json.dumps(json_ready(obj), indent=2, sort_keys=True, ensure_ascii=False)
    Path(path).write_text(text + "\n", encoding="utf-8")


def fmt_float(x: float) -> str:
    """Shortest decimal representation that round-trips to the same float."""
    return repr(float(x))


def slugify(name: str) -> str:
    """Filesystem-safe slug for a domain name."""
    slug = re.sub(r"[^a-z0-9]+", "_", name.lower()).strip("_")
    return slug or "unnamed"
