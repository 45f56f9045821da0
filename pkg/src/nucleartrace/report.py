"""Spectral reports and their JSON/CSV serialization."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

__all__ = ["SpectralReport", "to_jsonable", "emit_report", "load_report", "SCHEMA_VERSION"]

SCHEMA_VERSION = "1"


def _c(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


@dataclass
class SpectralReport:
    """Everything computed about one trace identity.

    ``target`` is the full (untruncated) value when known, with
    ``target_kind`` either ``"closed-form"``, ``"high-precision"`` or
    ``None``; ``tail_bound`` bounds the part of the full sum that the
    truncation discards.
    """

    eigenvalues: np.ndarray
    matrix_trace: complex
    eigenvalue_sum: complex
    pairing_trace: complex
    truncated_sum: complex
    target: float | None = None
    target_kind: str | None = None
    tail_bound: float | None = None
    truncation: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    @property
    def residuals(self) -> dict:
        scale = max(1.0, abs(self.matrix_trace))
        res = {
            "eigen_vs_matrix": abs(self.eigenvalue_sum - self.matrix_trace) / scale,
            "matrix_vs_truncated": abs(self.matrix_trace - self.truncated_sum) / scale,
            "pairing_vs_truncated": abs(self.pairing_trace - self.truncated_sum) / scale,
        }
        if self.target is not None:
            res["truncated_vs_target"] = abs(self.truncated_sum - self.target)
        return res

    def to_dict(self) -> dict:
        return {
            "eigenvalues": [_c(z) for z in self.eigenvalues],
            "matrix_trace": _c(self.matrix_trace),
            "eigenvalue_sum": _c(self.eigenvalue_sum),
            "pairing_trace": _c(self.pairing_trace),
            "truncated_sum": _c(self.truncated_sum),
            "target": self.target,
            "target_kind": self.target_kind,
            "tail_bound": self.tail_bound,
            "truncation": self.truncation,
            "residuals": self.residuals,
            "extra": to_jsonable(self.extra),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SpectralReport":
        z = lambda v: complex(v[0], v[1])
        return cls(
            eigenvalues=np.array([z(v) for v in d["eigenvalues"]], dtype=complex),
            matrix_trace=z(d["matrix_trace"]),
            eigenvalue_sum=z(d["eigenvalue_sum"]),
            pairing_trace=z(d["pairing_trace"]),
            truncated_sum=z(d["truncated_sum"]),
            target=d["target"],
            target_kind=d["target_kind"],
            tail_bound=d["tail_bound"],
            truncation=d["truncation"],
            extra=d.get("extra", {}),
        )

    def eigenvalue_table(self) -> tuple:
        rows = [(k, z.real, z.imag, abs(z)) for k, z in enumerate(self.eigenvalues)]
        return ("index", "re", "im", "modulus"), rows


def to_jsonable(obj: Any):
    """Recursively convert numpy/complex values into JSON-friendly objects."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return _c(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    return obj


def emit_report(report: dict, out_dir, tables: dict | None = None, name: str = "report") -> list:
    """Write ``<name>.json`` and one ``<name>_<table>.csv`` per table.

    ``tables`` maps a table name to ``(header, rows)``.  Returns the written
    paths.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    payload = dict(to_jsonable(report))
    payload.setdefault("schema", SCHEMA_VERSION)
    paths = []
    jp = out / f"{name}.json"
    jp.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    paths.append(jp)
    for tname, (header, rows) in (tables or {}).items():
        cp = out / f"{name}_{tname}.csv"
        with cp.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for row in rows:
                w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
        paths.append(cp)
    return paths


def load_report(path) -> dict:
    return json.loads(Path(path).read_text())
