"""JSON and CSV rendering of reports, plus the run manifest.

Every JSON document has the shape ``{"manifest": {...}, "result": {...}}``.
Non-finite floats are written as the strings ``"inf"``, ``"-inf"`` and
``"nan"`` so the output stays strict JSON.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Iterable, List, Sequence

import numpy as np

from . import __version__


def sig12(x: float) -> float:
    """Round to 12 significant digits."""
    return float(f"{x:.12g}")


@dataclass
class RunManifest:
    """Provenance block embedded in every CLI output.

    ``timestamp`` honours ``SOURCE_DATE_EPOCH`` so that repeated runs with the
    same manifest produce identical bytes.
    """

    subcommand: str
    parameters: Dict[str, Any]
    seed: Any = None
    version: str = __version__
    timestamp: str = field(default_factory=lambda: _timestamp())

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    t = int(epoch) if epoch else int(time.time())
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime(t))


def jsonable(obj: Any) -> Any:
    if hasattr(obj, "to_dict"):
        return jsonable(obj.to_dict())
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def to_json(manifest: RunManifest, result: Any) -> str:
    doc = {"manifest": manifest.to_dict(), "result": jsonable(result)}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def to_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([f"{v:.12g}" if isinstance(v, float) else v for v in row])
    return buf.getvalue()


# -- JSON schemas ---------------------------------------------------------

_NUM = {"oneOf": [{"type": "number"}, {"enum": ["inf", "-inf", "nan"]}]}
_NUMS = {"type": "array", "items": _NUM}
_MATRIX = {"type": "array", "items": _NUMS}
_T = {"oneOf": [{"type": "integer", "minimum": 0}, {"const": "infinite"}]}

MANIFEST_SCHEMA = {
    "type": "object",
    "required": ["subcommand", "parameters", "seed", "version", "timestamp"],
    "properties": {
        "subcommand": {"type": "string"},
        "parameters": {"type": "object"},
        "seed": {"type": ["integer", "null"]},
        "version": {"type": "string"},
        "timestamp": {"type": "string"},
    },
}

RANK_RESULT = {
    "type": "object",
    "required": ["reports"],
    "properties": {
        "reports": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["step", "top"],
                "properties": {
                    "step": {"type": "integer", "minimum": 0},
                    "top": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["item", "probability"],
                            "properties": {"item": {"type": "string"}, "probability": {"type": "number"}},
                        },
                    },
                },
            },
        }
    },
}

SAMPLE_STATS = {
    "type": "object",
    "required": ["mode", "paths", "steps", "mean", "covariance", "standard_error"],
    "properties": {
        "mode": {"enum": ["simplex", "real", "complex"]},
        "paths": {"type": "integer", "minimum": 1},
        "steps": {"type": "integer", "minimum": 0},
        "mean": _NUMS,
        "covariance": _MATRIX,
        "standard_error": _NUMS,
        "complex_mean": _NUMS,
        "complex_variance": _NUM,
    },
}

SIMULATE_RESULT = {
    "type": "object",
    "required": ["config", "stats"],
    "properties": {"config": {"type": "object"}, "stats": SAMPLE_STATS, "exact": {"type": "object"}},
}

MOMENTS_RESULT = {
    "type": "object",
    "required": ["central_moments", "scalar"],
    "properties": {
        "central_moments": {
            "type": "object",
            "required": ["alpha", "q", "order", "moments"],
            "properties": {"moments": _NUMS, "order": {"type": "integer"}},
        },
        "scalar": {"type": "object", "required": ["alpha", "q", "t", "mean", "variance"]},
        "finite": _NUMS,
    },
}

EIGEN_RESULT = {
    "type": "object",
    "required": ["covariance", "secular_roots"],
    "properties": {
        "covariance": {
            "type": "object",
            "required": ["Q", "alpha", "t", "scale", "covariance", "eigenvalues", "kernel_eigenvalues"],
            "properties": {"covariance": _MATRIX, "eigenvalues": _NUMS, "kernel_eigenvalues": _NUMS, "t": _T},
        },
        "secular_roots": {"oneOf": [_NUMS, {"type": "null"}]},
    },
}

BOUNDS_RESULT = {
    "type": "object",
    "required": ["alpha", "epsilon", "t", "q", "item_bounds", "item_bounds_raw", "worst_case_sqrt_eps_bound"],
    "properties": {
        "item_bounds": {"type": "array", "items": {"type": "number", "minimum": 0, "maximum": 1}},
        "item_bounds_raw": _NUMS,
        "t": _T,
    },
}

BOOST_RESULT = {
    "type": "object",
    "required": ["alpha", "t1", "t2", "exact", "approximate", "counting", "relative_gap"],
}

VERIFY_RESULT = {
    "type": "object",
    "required": ["budget", "passed", "checks"],
    "properties": {
        "passed": {"type": "boolean"},
        "checks": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "title", "passed", "residual", "tolerance"],
            },
        },
    },
}

RESULT_SCHEMAS = {
    "rank": RANK_RESULT,
    "simulate": SIMULATE_RESULT,
    "moments": MOMENTS_RESULT,
    "eigen": EIGEN_RESULT,
    "bounds": BOUNDS_RESULT,
    "boost": BOOST_RESULT,
    "verify": VERIFY_RESULT,
}


def document_schema(subcommand: str) -> Dict[str, Any]:
    return {
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "type": "object",
        "required": ["manifest", "result"],
        "properties": {"manifest": MANIFEST_SCHEMA, "result": RESULT_SCHEMAS[subcommand]},
    }
