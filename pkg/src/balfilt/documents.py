"""JSON documents for states and reports.

Rationals travel as ``"p/q"`` strings (integers may be bare), characters as
integer lists.  Output is deterministic: fixed key order, canonical
rationals.
"""

from __future__ import annotations

import hashlib
import json
from fractions import Fraction
from typing import Any, Optional

from .exactq import InnerProduct, as_rational, format_rational
from .states import PolarisedState, state_of_point

STATE_KEYS = ("rank", "characters", "polarisation", "gram", "point")


class DocumentError(ValueError):
    """Malformed input document; the message names the offending field."""


def _rational(value, where: str) -> Fraction:
    if isinstance(value, float):
        raise DocumentError(f"{where}: floats are not accepted, write {value!r} as \"p/q\"")
    try:
        return as_rational(value)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise DocumentError(f"{where}: malformed rational {value!r}") from exc


def _integer(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise DocumentError(f"{where}: expected an integer, got {value!r}")
    q = _rational(value, where)
    if q.denominator != 1:
        raise DocumentError(f"{where}: expected an integer, got {value!r}")
    return int(q)


def _list(value, where: str, length: Optional[int] = None) -> list:
    if not isinstance(value, list):
        raise DocumentError(f"{where}: expected a list")
    if length is not None and len(value) != length:
        raise DocumentError(f"{where}: expected length {length}, got {len(value)}")
    return value


def state_from_obj(obj: Any) -> PolarisedState:
    if not isinstance(obj, dict):
        raise DocumentError("document: expected a JSON object")
    unknown = sorted(set(obj) - set(STATE_KEYS))
    if unknown:
        raise DocumentError(f"document: unknown field {unknown[0]!r}")
    if "rank" not in obj:
        raise DocumentError("rank: missing")
    r = _integer(obj["rank"], "rank")
    if r < 0:
        raise DocumentError("rank: must be nonnegative")

    pol = None
    if obj.get("polarisation") is not None:
        pol = tuple(_rational(x, f"polarisation[{i}]")
                    for i, x in enumerate(_list(obj["polarisation"], "polarisation", r)))
    metric = None
    if obj.get("gram") is not None:
        rows = _list(obj["gram"], "gram", r)
        gram = tuple(tuple(_rational(x, f"gram[{i}][{j}]") for j, x in enumerate(_list(row, f"gram[{i}]", r)))
                     for i, row in enumerate(rows))
        try:
            metric = InnerProduct(gram)
        except ValueError as exc:
            raise DocumentError(f"gram: {exc}") from exc

    if obj.get("point") is not None:
        if "characters" in obj:
            raise DocumentError("point: give either characters or a point, not both")
        point = obj["point"]
        if not isinstance(point, dict) or set(point) != {"weights", "coordinates"}:
            raise DocumentError("point: expected an object with weights and coordinates")
        weights = _list(point["weights"], "point.weights")
        coords = _list(point["coordinates"], "point.coordinates", len(weights))
        w = [tuple(_integer(x, f"point.weights[{i}][{j}]") for j, x in enumerate(_list(row, f"point.weights[{i}]", r)))
             for i, row in enumerate(weights)]
        c = [_rational(x, f"point.coordinates[{i}]") for i, x in enumerate(coords)]
        if not w:
            return PolarisedState(r, (), pol, metric)
        return state_of_point(w, c, pol, metric)

    if "characters" not in obj:
        raise DocumentError("characters: missing")
    chars = []
    for i, chi in enumerate(_list(obj["characters"], "characters")):
        c = tuple(_integer(x, f"characters[{i}][{j}]") for j, x in enumerate(_list(chi, f"characters[{i}]", r)))
        if not any(c):
            raise DocumentError(f"characters[{i}]: zero character")
        chars.append(c)
    return PolarisedState(r, tuple(chars), pol, metric)


def parse_state(text: str) -> PolarisedState:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return state_from_obj(obj)


def rational_list(v) -> list:
    return [format_rational(Fraction(x)) for x in v]


def state_to_obj(s: PolarisedState) -> dict:
    """Canonical document: every field present, characters as ints, rationals as strings."""
    return {
        "rank": s.rank,
        "characters": [list(c) for c in s.characters],
        "polarisation": rational_list(s.polarisation),
        "gram": [rational_list(row) for row in s.metric.gram],
    }


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def emit_state(s: PolarisedState) -> str:
    return dumps(state_to_obj(s))


def digest(text: str) -> str:
    return "sha256:" + hashlib.sha256(text.encode("utf-8")).hexdigest()


def make_report(command: list, input_text: str, result: dict, version: str) -> dict:
    return {
        "command": list(command),
        "input_digest": digest(input_text),
        "result": result,
        "version": version,
    }


def parse_report(text: str) -> dict:
    obj = json.loads(text)
    if not isinstance(obj, dict) or list(obj) != ["command", "input_digest", "result", "version"]:
        raise DocumentError("report: unexpected layout")
    return obj
