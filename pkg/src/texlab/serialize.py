"""Canonical report serialization.

Reports must be byte-identical for identical inputs, so floats are emitted
with a fixed 17-significant-digit format (enough to round-trip IEEE doubles)
instead of relying on ``json.dumps`` float formatting. Infinities serialize
as the string ``"inf"`` because JSON has no infinity literal.
"""

from __future__ import annotations

import json
import math
from typing import Any

import numpy as np

ARTIFACT_VERSION = "0.1.0"


def format_float(value: float) -> str:
    """Render a float with 17 significant digits (bit-exact round trip)."""
    if math.isnan(value):
        return '"nan"'
    if math.isinf(value):
        return '"inf"' if value > 0 else '"-inf"'
    return f"{value:.17g}"


def complex_pair(z: complex) -> list[float]:
    """Represent a complex number as a two-element [real, imag] list."""
    z = complex(z)
    return [z.real, z.imag]


def _emit(obj: Any, parts: list[str]) -> None:
    if obj is None:
        parts.append("null")
    elif isinstance(obj, bool):
        parts.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        parts.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        parts.append(format_float(float(obj)))
    elif isinstance(obj, (complex, np.complexfloating)):
        _emit(complex_pair(complex(obj)), parts)
    elif isinstance(obj, str):
        parts.append(json.dumps(obj))
    elif isinstance(obj, dict):
        parts.append("{")
        for i, (key, value) in enumerate(obj.items()):
            if not isinstance(key, str):
                raise TypeError(f"object keys must be strings, got {key!r}")
            if i:
                parts.append(", ")
            parts.append(json.dumps(key))
            parts.append(": ")
            _emit(value, parts)
        parts.append("}")
    elif isinstance(obj, (list, tuple)) or (isinstance(obj, np.ndarray) and obj.ndim == 1):
        parts.append("[")
        for i, item in enumerate(obj):
            if i:
                parts.append(", ")
            _emit(item, parts)
        parts.append("]")
    else:
        raise TypeError(f"cannot serialize object of type {type(obj).__name__}")


def dumps_canonical(obj: Any) -> str:
    """Serialize to canonical JSON text (insertion-ordered keys, fixed floats)."""
    parts: list[str] = []
    _emit(obj, parts)
    parts.append("\n")
    return "".join(parts)


def parse_float_field(value: Any, *, name: str) -> float:
    """Parse a report float that may be the literal string "inf"/"-inf"."""
    if isinstance(value, str):
        if value == "inf":
            return math.inf
        if value == "-inf":
            return -math.inf
        if value == "nan":
            return math.nan
        raise ValueError(f"{name}: unrecognized float string {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    raise ValueError(f"{name}: expected a number, got {type(value).__name__}")


def parse_complex_field(value: Any, *, name: str) -> complex:
    """Parse a [real, imag] pair (a bare real number is accepted)."""
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        re, im = value
        if isinstance(re, (int, float)) and isinstance(im, (int, float)):
            return complex(float(re), float(im))
    raise ValueError(f"{name}: expected [real, imag], got {value!r}")
