"""Problem and report files: JSON schema, canonical serialisation, hashing."""

from __future__ import annotations

import hashlib
import json
import math
import os
import tempfile
from dataclasses import dataclass, field

import jsonschema

from .errors import FracoptError, SchemaError
from .functional import ProblemDefinition
from .measures import ControlSpace, ParameterDomain
from .reduction import SolveConfig

_number = {"type": "number"}
_number_or_inf = {"anyOf": [{"type": "number"}, {"const": "inf"}]}

PROBLEM_SCHEMA = {
    "type": "object",
    "required": ["name", "A", "B", "sign_B", "S", "U", "direction"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "A": {"type": "string", "minLength": 1},
        "B": {"type": "string", "minLength": 1},
        "sign_B": {"enum": ["positive", "negative"]},
        "direction": {"enum": ["max", "min"]},
        "S": {
            "type": "object",
            "required": ["lower", "upper"],
            "additionalProperties": False,
            "properties": {"lower": {"type": "array", "items": _number}, "upper": {"type": "array", "items": _number}},
        },
        "U": {
            "oneOf": [
                {
                    "type": "object",
                    "required": ["kind", "lower", "upper"],
                    "additionalProperties": False,
                    "properties": {
                        "kind": {"const": "box"},
                        "lower": {"type": "array", "minItems": 1, "items": _number},
                        "upper": {"type": "array", "minItems": 1, "items": _number_or_inf},
                    },
                },
                {
                    "type": "object",
                    "required": ["kind", "points"],
                    "additionalProperties": False,
                    "properties": {
                        "kind": {"const": "finite"},
                        "points": {"type": "array", "minItems": 1, "items": {"type": "array", "minItems": 1, "items": _number}},
                    },
                },
            ]
        },
        "config": {"type": "object"},
    },
}


# ------------------------------------------------------------ canonical JSON


def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return "%.17g" % x


def canonical_dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with sorted keys and every float written as %.17g."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _fmt_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [canonical_dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(pad + it for it in items) + "\n" + end + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{json.dumps(str(k))}: {canonical_dumps(obj[k], indent, _level + 1)}" for k in sorted(obj, key=str)]
        return "{\n" + ",\n".join(pad + it for it in items) + "\n" + end + "}"
    if hasattr(obj, "item"):  # numpy scalars
        return canonical_dumps(obj.item(), indent, _level)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def atomic_write(path, text: str) -> None:
    """Write ``text`` to ``path`` via a temporary file and rename."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".fracopt-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ------------------------------------------------------------- problem files


@dataclass
class ProblemFile:
    problem: ProblemDefinition
    config: dict = field(default_factory=dict)  # validated SolveConfig overrides

    def solve_config(self, **overrides) -> SolveConfig:
        merged = dict(self.config)
        merged.update({k: v for k, v in overrides.items() if v is not None})
        return SolveConfig.from_dict(merged)

    def to_dict(self) -> dict:
        p = self.problem
        if p.U.kind == "box":
            U = {"kind": "box", "lower": list(p.U.lower), "upper": [("inf" if math.isinf(x) else x) for x in p.U.upper]}
        else:
            U = {"kind": "finite", "points": [list(pt) for pt in p.U.points]}
        d = {
            "name": p.name,
            "A": p.a_text,
            "B": p.b_text,
            "sign_B": p.sign_B,
            "direction": p.direction,
            "S": {"lower": list(p.S.lower), "upper": list(p.S.upper)},
            "U": U,
        }
        if self.config:
            d["config"] = dict(self.config)
        return d

    def dumps(self) -> str:
        return canonical_dumps(self.to_dict()) + "\n"

    def hash(self) -> str:
        return hashlib.sha256(canonical_dumps(self.to_dict(), indent=0).encode()).hexdigest()


def problem_from_dict(doc: dict) -> ProblemFile:
    try:
        jsonschema.validate(doc, PROBLEM_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(x) for x in exc.absolute_path) or "<root>"
        raise SchemaError(f"problem file invalid at {where}: {exc.message}") from None
    S, U = doc["S"], doc["U"]
    if len(S["lower"]) != len(S["upper"]):
        raise SchemaError("S.lower and S.upper differ in length")
    try:
        sdom = ParameterDomain(tuple(S["lower"]), tuple(S["upper"]))
        if U["kind"] == "box":
            if len(U["lower"]) != len(U["upper"]):
                raise SchemaError("U.lower and U.upper differ in length")
            upper = [math.inf if x == "inf" else float(x) for x in U["upper"]]
            space = ControlSpace.box(U["lower"], upper)
        else:
            space = ControlSpace.finite(tuple(tuple(pt) for pt in U["points"]))
        problem = ProblemDefinition.from_text(doc["name"], doc["A"], doc["B"], sdom, space, doc["sign_B"], doc["direction"])
        config = doc.get("config", {})
        normalized = SolveConfig.from_dict(config).to_dict()
        config = {k: normalized[k] for k in config}
    except FracoptError as exc:
        if isinstance(exc, SchemaError):
            raise
        raise SchemaError(f"problem file invalid: {exc}") from exc
    except ValueError as exc:
        raise SchemaError(f"problem file invalid: {exc}") from exc
    return ProblemFile(problem, config)


def load_problem(path) -> ProblemFile:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from None
    return problem_from_dict(doc)


def save_problem(pf: ProblemFile, path) -> None:
    atomic_write(path, pf.dumps())
