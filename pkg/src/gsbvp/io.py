"""Problem files: JSON schema, decoding into model objects, deterministic output.

Matrices are row-major nested lists; a complex entry is ``[re, im]`` and a
plain number is read as real. Output floats carry 17 significant digits so
every value round-trips exactly.
"""

from __future__ import annotations

import enum
import inspect
import json
import math

import jsonschema
import numpy as np

from .bhalf import BoundaryMesh
from .boundary import BUILTIN_SETUPS, BoundarySetup
from .errors import ShapeMismatch, UnsupportedModel, ValidationError
from .gauge import GaugeSymbol, builtin_model

SCHEMA_VERSION = 1

_NUMBER = {"type": "number"}
_ENTRY = {
    "oneOf": [
        _NUMBER,
        {"type": "array", "items": _NUMBER, "minItems": 2, "maxItems": 2},
    ]
}
_MATRIX = {"type": "array", "minItems": 1, "items": {"type": "array", "minItems": 1, "items": _ENTRY}}

_BOUNDARY_EXPLICIT = {
    "type": "object",
    "properties": {
        "m": {"type": "integer", "minimum": 2},
        "dim_v": {"type": "integer", "minimum": 1},
        "pi": _MATRIX,
        "gamma": {"type": "array", "items": _MATRIX},
        "s": _MATRIX,
        "q": _MATRIX,
        "label": {"type": "string"},
    },
    "required": ["m", "dim_v", "pi", "gamma"],
    "additionalProperties": False,
}
_BOUNDARY_MODEL = {
    "type": "object",
    "properties": {
        "model": {"enum": sorted(BUILTIN_SETUPS)},
        "args": {"type": "object"},
    },
    "required": ["model"],
    "additionalProperties": False,
}
_BOUNDARY = {"oneOf": [_BOUNDARY_EXPLICIT, _BOUNDARY_MODEL]}

_GAUGE = {
    "oneOf": [
        {
            "type": "object",
            "properties": {
                "model": {"enum": ["abelian-vector", "graviton"]},
                "m": {"type": "integer", "minimum": 2},
                "params": {"type": "object"},
            },
            "required": ["model", "m"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {
                "dim_v": {"type": "integer", "minimum": 2},
                "dim_g": {"type": "integer", "minimum": 1},
                "nu": _MATRIX,
                "mu": {"type": "array", "minItems": 1, "items": _MATRIX},
                "e_metric": _MATRIX,
                "g_metric": _MATRIX,
                "indefinite_metric": {"type": "boolean"},
                "label": {"type": "string"},
            },
            "required": ["dim_v", "dim_g", "nu", "mu", "e_metric", "g_metric"],
            "additionalProperties": False,
        },
    ]
}

_MESH = {
    "type": "object",
    "properties": {
        "cells": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "properties": {"setup": _BOUNDARY, "area": {"type": "number", "exclusiveMinimum": 0}},
                "required": ["setup", "area"],
                "additionalProperties": False,
            },
        },
        "volume": {"type": "number", "exclusiveMinimum": 0},
    },
    "required": ["cells"],
    "additionalProperties": False,
}

_GRID = {"type": "array", "items": _NUMBER, "minItems": 3, "maxItems": 3}
_PARAMETERS = {
    "type": "object",
    "properties": {
        "method": {"enum": ["auto", "closed", "quad", "tensor", "series"]},
        "order": {"type": "integer", "minimum": 4},
        "n_max": {"type": "integer", "minimum": 0},
        "n_samples": {"type": "integer", "minimum": 1},
        "z_grid": _GRID,
        "with_j": {"type": "boolean"},
        "t": {"type": "number", "exclusiveMinimum": 0},
        "r_grid": _GRID,
        "t_sweep": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 2},
        "grid": {"type": "integer", "minimum": 1},
        "length": {"type": "number", "exclusiveMinimum": 0},
    },
    "additionalProperties": False,
}

PROBLEM_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "kind": {"enum": ["boundary", "gauge", "mesh"]},
        "payload": {"type": "object"},
        "parameters": _PARAMETERS,
    },
    "required": ["schema_version", "kind", "payload"],
    "additionalProperties": False,
    "allOf": [
        {"if": {"properties": {"kind": {"const": "boundary"}}}, "then": {"properties": {"payload": _BOUNDARY}}},
        {"if": {"properties": {"kind": {"const": "gauge"}}}, "then": {"properties": {"payload": _GAUGE}}},
        {"if": {"properties": {"kind": {"const": "mesh"}}}, "then": {"properties": {"payload": _MESH}}},
    ],
}


class SchemaError(ValidationError):
    """Problem document does not match the schema."""


def validate_document(doc) -> dict:
    """Validate a problem document; a report document yields its embedded problem."""
    if isinstance(doc, dict) and "problem" in doc and "schema_version" not in doc:
        doc = doc["problem"]
    validator = jsonschema.Draft202012Validator(PROBLEM_SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        where = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise SchemaError(f"schema violation at {where}: {err.message}")
    return doc


def load_document(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path} is not valid JSON: {exc}") from exc
    return validate_document(raw)


# --------------------------------------------------------------- decoding

def parse_matrix(rows) -> np.ndarray:
    width = {len(r) for r in rows}
    if len(width) != 1:
        raise ShapeMismatch("matrix rows have different lengths")
    out = np.empty((len(rows), width.pop()), dtype=complex)
    for i, row in enumerate(rows):
        for j, x in enumerate(row):
            out[i, j] = complex(x[0], x[1]) if isinstance(x, list) else complex(x)
    return out


def boundary_from_payload(p: dict) -> BoundarySetup:
    if "model" in p:
        fn = BUILTIN_SETUPS[p["model"]]
        args = dict(p.get("args", {}))
        if "pi" in args:
            args["pi"] = parse_matrix(args["pi"])
        try:
            inspect.signature(fn).bind(**args)
        except TypeError as exc:
            raise UnsupportedModel(f"bad arguments for {p['model']}: {exc}") from exc
        return fn(**args)
    return BoundarySetup(
        p["m"], p["dim_v"], parse_matrix(p["pi"]), [parse_matrix(g) for g in p["gamma"]],
        parse_matrix(p["s"]) if "s" in p else None,
        parse_matrix(p["q"]) if "q" in p else None,
        p.get("label", ""),
    )


def gauge_from_payload(p: dict) -> GaugeSymbol:
    if "model" in p:
        return builtin_model(p["model"], p["m"], p.get("params"))
    return GaugeSymbol(
        p["dim_v"], p["dim_g"], parse_matrix(p["nu"]), tuple(parse_matrix(x) for x in p["mu"]),
        parse_matrix(p["e_metric"]), parse_matrix(p["g_metric"]),
        bool(p.get("indefinite_metric", False)), p.get("label", ""),
    )


def mesh_from_payload(p: dict) -> BoundaryMesh:
    return BoundaryMesh(tuple((boundary_from_payload(c["setup"]), c["area"]) for c in p["cells"]))


# ---------------------------------------------------------------- output

def _fmt_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        return json.dumps(str(x))
    s = format(x, ".17g")
    if s in ("-0", "0"):
        return "0.0" if s == "0" else "-0.0"
    if "e" not in s and "." not in s and "inf" not in s:
        s += ".0"
    return s


def to_plain(obj):
    """Convert numpy, complex and enum values to JSON-ready Python objects."""
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_plain(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def dumps(obj, indent: int = 2) -> str:
    """Deterministic JSON with 17-significant-digit floats."""
    return _emit(to_plain(obj), 0, indent) + "\n"


def _emit(obj, level, indent):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k, ensure_ascii=False)}: {_emit(v, level + 1, indent)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(_emit(v, level + 1, indent) for v in obj) + "]"
        items = [pad + _emit(v, level + 1, indent) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        return _fmt_float(obj)
    if isinstance(obj, int):
        return str(obj)
    return json.dumps(obj, ensure_ascii=False)


def matrix_to_json(a: np.ndarray):
    """Row-major matrix with [re, im] entries."""
    return [[[float(x.real), float(x.imag)] for x in row] for row in np.asarray(a, dtype=complex)]


def csv_number(x: float) -> str:
    return format(float(x), ".17g")
