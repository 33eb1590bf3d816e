"""Deterministic CSV/JSON serialization.

Floats are written with 17 significant digits so every value round-trips
exactly; non-finite floats become ``nan``/``inf`` in CSV and ``null`` in
JSON. Nothing time-dependent is ever written.
"""

from __future__ import annotations

import csv
import enum
import json
import math
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .core import PositiveSolution
from .solvers import FIXED_POINT_TOL, SHOOT_TOL, residual_scale


def fmt(x: Any) -> str:
    """Text form of a scalar for CSV cells."""
    if isinstance(x, enum.Enum):
        return str(x.value)
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def _json(obj: Any, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, enum.Enum):
        obj = obj.value
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return format(x, ".17g") if math.isfinite(x) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_json(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        if all(isinstance(v, (int, float, np.integer, np.floating)) for v in obj):
            return "[" + ", ".join(_json(v, indent, level + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _json(v, indent, level + 1) for v in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_json(obj: Any, indent: int = 2) -> str:
    return _json(obj, indent, 0) + "\n"


def write_json(path: Path, obj: Any) -> Path:
    path.write_text(dumps_json(obj), encoding="utf-8")
    return path


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(c) for c in r])
    return path


def write_table(path_stem: Path, header: Sequence[str], rows: Sequence[Sequence[Any]],
                fmt_name: str, extra: dict | None = None) -> Path:
    """Write ``rows`` as ``<stem>.csv`` or as ``<stem>.json`` (a list of records)."""
    if fmt_name == "csv":
        return write_csv(path_stem.with_suffix(".csv"), header, rows)
    payload: dict[str, Any] = {"records": [dict(zip(header, r)) for r in rows]}
    if extra:
        payload.update(extra)
    return write_json(path_stem.with_suffix(".json"), payload)


# ----------------------------------------------------------------- records


def residual_block(shoot: float, fixed_point: float, r_max: float) -> dict[str, Any]:
    sc = residual_scale(r_max)
    warn = not (shoot < SHOOT_TOL * sc and fixed_point < FIXED_POINT_TOL * sc)
    return {"shoot": shoot, "fixed_point": fixed_point, "warn": warn}


def solution_record(sol: PositiveSolution, samples_ref: str | None = None) -> dict[str, Any]:
    """JSON record of a solution; ``samples-ref`` names its trajectory file."""
    return {
        "params": sol.params.as_dict(),
        "v0": sol.v0,
        "r_max": sol.r_max,
        "x_max": sol.x_max,
        "symmetry": sol.symmetry.value,
        "residuals": residual_block(sol.shoot_residual, sol.fixed_point_residual, sol.r_max),
        "samples-ref": samples_ref,
    }


SOLUTION_COLUMNS = ("lambda", "p", "h", "v0", "r_max", "x_max", "symmetry", "shoot_residual",
                    "fixed_point_residual", "warn", "samples_ref")


def solution_row(sol: PositiveSolution, samples_ref: str | None = None) -> list[Any]:
    r = solution_record(sol, samples_ref)
    pr = sol.params
    return [pr.lam, pr.p, pr.h, sol.v0, sol.r_max, sol.x_max, sol.symmetry.value,
            sol.shoot_residual, sol.fixed_point_residual, r["residuals"]["warn"], samples_ref or ""]


def trajectory_rows(sol: PositiveSolution) -> list[list[Any]]:
    rows = []
    for arc in sol.arcs:
        reg = arc.regime.value
        rows.extend([float(x), float(u), float(v), reg] for x, u, v in zip(arc.x, arc.u, arc.v))
    return rows


def write_trajectory(path: Path, sol: PositiveSolution) -> Path:
    return write_csv(path, ("x", "u", "v", "regime"), trajectory_rows(sol))
