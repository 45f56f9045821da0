"""Command line: ``nucleartrace <experiment> --config cfg.json --out DIR``.

Exit status is 0 when every check passes, 3 when a tolerance check fails and
2 for usage or configuration errors (no report is written in that case).
"""
from __future__ import annotations

import argparse
import copy
import datetime as _dt
import json
import logging
import platform
import sys
from importlib import metadata
from pathlib import Path

import jsonschema
import numpy as np
import scipy

from .experiments import DEFAULTS, EXPERIMENTS, ConfigError
from .report import SCHEMA_VERSION, emit_report

log = logging.getLogger("nucleartrace")

EXIT_OK = 0
EXIT_FAILED = 3
EXIT_USAGE = 2

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_posint = {"type": "integer", "minimum": 1}

_grid = {
    "type": "object",
    "properties": {
        "kind": {"enum": ["torus", "interval", "line"]},
        "n": _posint, "dim": _posint, "start": _num, "stop": _num, "L": _pos,
    },
    "required": ["n"],
}
_function = {
    "type": "object",
    "properties": {"name": {"enum": ["constant", "cosine", "bump", "gaussian", "random", "file"]},
                   "path": {"type": "string"}},
    "required": ["name"],
}
_exponent = {
    "type": "object",
    "properties": {"kind": {"enum": ["constant", "affine", "sine"]}, "p": {"type": "number", "minimum": 1}},
    "required": ["kind"],
}
_symbol = {
    "type": "object",
    "properties": {"name": {"enum": ["bessel", "custom-table"]}, "tau": _pos,
                   "freqs": {"type": "array"}, "values": {"type": "array"}},
    "required": ["name"],
    "if": {"properties": {"name": {"const": "bessel"}}},
    "then": {"required": ["tau"]},
    "else": {"required": ["freqs", "values"]},
}
_specfn = {"type": "object", "properties": {"name": {"enum": ["exp", "inverse_square", "projection"]}},
           "required": ["name"]}

PARAM_SCHEMAS = {
    "norm": {"type": "object", "required": ["grid", "function", "exponents"],
             "properties": {"grid": _grid, "function": _function,
                            "exponents": {"type": "array", "items": {"type": "number", "minimum": 1}, "minItems": 1},
                            "convention": {"enum": ["pointwise", "density"]},
                            "partition": {"type": "array", "items": _posint}, "expected": _num}},
    "luxemburg": {"type": "object", "required": ["grid", "function", "exponent"],
                  "properties": {"grid": _grid, "function": _function, "exponent": _exponent}},
    "stft-check": {"type": "object", "required": ["L", "n"],
                   "properties": {"L": _pos, "n": {"type": "integer", "minimum": 2, "multipleOf": 2},
                                  "f_width": _pos, "g_width": _pos,
                                  "p": {"type": "number", "minimum": 1}, "q": {"type": "number", "minimum": 1},
                                  "s": _num, "min_reduction": _pos}},
    "map-demo": {"type": "object",
                 "properties": {"trials": _posint, "n": _posint, "dim": _posint,
                                "counts": {"type": "array", "items": _posint}, "boxes_per_axis": _posint}},
    "nuclear-trace": {"type": "object",
                      "properties": {"trials": _posint, "max_rank": _posint, "max_nodes": {"type": "integer", "minimum": 4}}},
    "torus-verify": {"type": "object", "required": ["N", "symbol"],
                     "properties": {"N": {"type": "integer", "minimum": 0}, "dim": _posint, "grid_points": _posint,
                                    "alpha": _function, "symbol": _symbol, "dimension_cap": _posint}},
    "hermite-verify": {"type": "object", "required": ["F"],
                       "properties": {"d": _posint, "J": {"type": "integer", "minimum": 0}, "F": _specfn, "grid": _grid}},
    "nuclearity-ledger": {"type": "object",
                          "properties": {"target": {"enum": ["torus", "hermite"]}, "symbol": _symbol,
                                         "r": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                                         "Ns": {"type": "array", "items": _posint, "minItems": 3},
                                         "F": _specfn, "p": {"type": "number", "minimum": 1},
                                         "q": {"type": "number", "minimum": 1}, "s": _num},
                          "if": {"properties": {"target": {"const": "hermite"}}, "required": ["target"]},
                          "then": {"required": ["F"]},
                          "else": {"required": ["symbol", "r"]}},
}

CONFIG_SCHEMA = {
    "type": "object",
    "properties": {
        "schema": {"const": SCHEMA_VERSION},
        "kind": {"enum": sorted(EXPERIMENTS)},
        "seed": {"type": "integer", "minimum": 0},
        "params": {"type": "object"},
        "tolerances": {"type": "object", "additionalProperties": _pos},
    },
    "required": ["params"],
}


class UsageError(Exception):
    pass


def _check_files(obj):
    if isinstance(obj, dict):
        if obj.get("name") == "file":
            path = Path(obj.get("path", ""))
            if not path.with_suffix(".json").exists():
                raise UsageError(f"referenced file {path} does not exist")
        for v in obj.values():
            _check_files(v)
    elif isinstance(obj, list):
        for v in obj:
            _check_files(v)


def validate_config(kind: str, config: dict) -> dict:
    try:
        jsonschema.validate(config, CONFIG_SCHEMA)
        jsonschema.validate(config["params"], PARAM_SCHEMAS[kind])
    except jsonschema.ValidationError as exc:
        raise UsageError(f"invalid config: {exc.message}") from None
    if config.get("kind", kind) != kind:
        raise UsageError(f"config is for {config['kind']!r}, not {kind!r}")
    unknown = set(config.get("tolerances", {})) - set(DEFAULTS[kind])
    if unknown:
        raise UsageError(f"unknown tolerances: {sorted(unknown)}")
    _check_files(config["params"])
    return config


def versions() -> dict:
    try:
        own = metadata.version("artifact")
    except metadata.PackageNotFoundError:
        own = "unknown"
    return {"nucleartrace": own, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version()}


def run(kind: str, config: dict, out_dir, seed: int | None = None, tolerance_scale: float = 1.0) -> tuple:
    """Execute one experiment and write its report; returns ``(exit_code, report)``."""
    config = validate_config(kind, copy.deepcopy(config))
    if tolerance_scale <= 0:
        raise UsageError("tolerance scale must be positive")
    seed = config.get("seed", 0) if seed is None else seed
    tol = {k: v * tolerance_scale for k, v in {**DEFAULTS[kind], **config.get("tolerances", {})}.items()}
    rng = np.random.default_rng(seed)
    try:
        results, checks, tables = EXPERIMENTS[kind](config["params"], tol, rng)
    except (ConfigError, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    failed = [c["name"] for c in checks if not c["passed"]]
    report = {
        "schema": SCHEMA_VERSION,
        "kind": kind,
        "config": config,
        "seed": seed,
        "tolerance_scale": tolerance_scale,
        "tolerances": tol,
        "versions": versions(),
        "results": results,
        "checks": checks,
        "failed": failed,
        "status": "pass" if not failed else "fail",
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
    }
    emit_report(report, out_dir, tables, name=kind)
    return (EXIT_OK if not failed else EXIT_FAILED), report


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nucleartrace", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="kind", required=True)
    for kind in EXPERIMENTS:
        sp = sub.add_parser(kind)
        sp.add_argument("--config", required=True, type=Path)
        sp.add_argument("--out", default=Path("reports"), type=Path)
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--tolerance-scale", type=float, default=1.0)
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        config = json.loads(args.config.read_text())
        code, report = run(args.kind, config, args.out, args.seed, args.tolerance_scale)
    except (OSError, json.JSONDecodeError, UsageError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    for c in report["checks"]:
        print(f"{'PASS' if c['passed'] else 'FAIL'} {c['name']}: {c['value']!r} {c['relation']} {c['limit']!r}")
    print(f"{report['status']}: report written to {args.out}")
    return code


if __name__ == "__main__":
    sys.exit(main())
