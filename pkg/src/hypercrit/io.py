"""Loading JSON inputs and writing deterministic CSV/JSON reports."""

from __future__ import annotations

import csv
import io
import json
import math
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Sequence

from hypercrit.errors import InvalidInputError
from hypercrit.space.tree import BoundaryPoint, Word
from hypercrit.subgroups.graphs import FiniteAction
from hypercrit.subgroups.handles import SubgroupHandle, subgroup_from_json

SCHEMA_VERSION = 1
FLOAT_FORMAT = "%.12g"


def load_json(path: str | Path) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise InvalidInputError(f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None


def load_subgroup(path: str | Path, rank: int | None = None) -> SubgroupHandle:
    return subgroup_from_json(load_json(path), rank)


def load_action(path: str | Path) -> FiniteAction:
    data = load_json(path)
    if isinstance(data, dict):
        extra = set(data) - {"permutations"}
        if extra or "permutations" not in data:
            raise InvalidInputError("action file needs exactly a 'permutations' list")
        data = data["permutations"]
    if not isinstance(data, list):
        raise InvalidInputError("action must be a list of permutations")
    return FiniteAction(tuple(tuple(p) for p in data))


def fmt_float(x: float) -> str:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return FLOAT_FORMAT % x


def normalize(obj: Any) -> Any:
    """JSON-ready copy: floats rounded to 12 significant digits, Fractions as "p/q"."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return fmt_float(obj)
        return float(FLOAT_FORMAT % obj)
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, (Word, BoundaryPoint)):
        return str(obj)
    if isinstance(obj, dict):
        return {str(k): normalize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [normalize(v) for v in obj]
    if hasattr(obj, "to_json"):
        return normalize(obj.to_json())
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dump_json(obj: dict) -> str:
    payload = {"schemaVersion": SCHEMA_VERSION}
    payload.update(normalize(obj))
    return json.dumps(payload, indent=2) + "\n"


def _cell(v: Any) -> str:
    if isinstance(v, float):
        return fmt_float(v)
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if v is None:
        return ""
    return str(v)


def dump_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()
