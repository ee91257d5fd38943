"""CSV series and JSON documents (configs, manifests, fit reports)."""
from __future__ import annotations

import csv
import datetime as _dt
import json
import math
import os
import platform
from pathlib import Path

import numpy as np

from . import __version__

RELAX_COLUMNS = ("t", "sigma_z_norm")
QUENCH_COLUMNS = ("t", "g", "energy", "gs_energy", "e_r", "p_exc")
SUMMARY_COLUMNS = ("t_q", "t_f", "e_exc", "p_exc")
TAU_COLUMNS = ("g", "tau")
FREEZE_COLUMNS = ("t_q", "t_f", "g_at_freeze", "ramp_time", "residual")

KNOWN_SCHEMAS = (RELAX_COLUMNS, QUENCH_COLUMNS, QUENCH_COLUMNS[:-1], SUMMARY_COLUMNS, TAU_COLUMNS,
                 FREEZE_COLUMNS, ("t_f", "e_exc"), ("t_f", "p_exc"), ("t", "y"))


class ParseError(ValueError):
    def __init__(self, path, line, message):
        super().__init__(f"{path}:{line}: {message}")
        self.path = str(path)
        self.line = line


def _fmt(x) -> str:
    return repr(float(x))


def write_csv(path, columns, rows) -> None:
    """Write rows of floats with ``repr`` formatting (round-trips exactly)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            if len(row) != len(columns):
                raise ValueError(f"row has {len(row)} values, expected {len(columns)}")
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_columns(path, columns, *arrays) -> None:
    write_csv(path, columns, zip(*arrays))


def read_csv(path, expected=None) -> dict:
    """Read a numeric CSV into ``{column: array}``.

    The header must equal ``expected`` if given, otherwise one of the known
    schemas. Parse failures raise ``ParseError`` naming the file and line.
    """
    path = Path(path)
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = tuple(h.strip() for h in next(reader))
        except StopIteration:
            raise ParseError(path, 1, "empty file") from None
        if expected is not None:
            expected = tuple(expected)
            if header != expected:
                raise ParseError(path, 1, f"header {','.join(header)!r} != expected {','.join(expected)!r}")
        elif header not in KNOWN_SCHEMAS:
            raise ParseError(path, 1, f"unknown columns {','.join(header)!r}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ParseError(path, lineno, f"expected {len(header)} fields, got {len(row)}")
            try:
                vals = [float(v) for v in row]
            except ValueError as exc:
                raise ParseError(path, lineno, str(exc)) from None
            if not all(math.isfinite(v) for v in vals):
                raise ParseError(path, lineno, "non-finite value")
            rows.append(vals)
    data = np.array(rows, dtype=float).reshape(-1, len(header))
    return {name: data[:, i] for i, name in enumerate(header)}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def write_json(path, doc) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(doc), fh, indent=2, sort_keys=True, allow_nan=True)
        fh.write("\n")


def read_json(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(path, exc.lineno, exc.msg) from None


def now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def new_manifest(config: dict, command: str) -> dict:
    return {
        "command": command,
        "config": config,
        "code_version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "units": {"energy": "delta=1", "time": "1/delta"},
        "started": now(),
        "finished": None,
        "status": "running",
        "runs": {},
    }


def finish_manifest(path, manifest: dict, status: str = "complete") -> None:
    manifest["finished"] = now()
    manifest["status"] = status
    write_json(path, manifest)


def default_output_root() -> Path:
    return Path(os.environ.get("OQRM_OUTPUT_ROOT", "runs"))
