"""JSON payloads: functions, relations, matrices, witnesses, reports."""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

import numpy as np

from .boolean_core import BooleanFunction, Relation
from .programs import FunctionalDualWitness, RelationalDualWitness


def matrix_to_json(A: np.ndarray) -> dict:
    A = np.asarray(A, dtype=float)
    return {"rows": int(A.shape[0]), "cols": int(A.shape[1]), "data": A.ravel().tolist()}


def matrix_from_json(data: dict) -> np.ndarray:
    rows, cols = int(data["rows"]), int(data["cols"])
    values = np.asarray(data["data"], dtype=float)
    if values.size != rows * cols:
        raise ValueError(f"matrix payload has {values.size} entries, expected {rows * cols}")
    return values.reshape(rows, cols)


def witness_to_json(w: FunctionalDualWitness | RelationalDualWitness) -> dict:
    """``u``/``v`` keyed ``"x,i"`` and ``sigma`` keyed ``"x,a"`` (``i``, ``a`` 1-indexed).

    Only the support of a relation carries sigma entries.
    """
    size, n, d = w.u.shape
    out: dict[str, Any] = {"dim": int(d)}
    out["u"] = {f"{x},{i + 1}": w.u[x, i].tolist() for x in range(size) for i in range(n)}
    out["v"] = {f"{x},{i + 1}": w.v[x, i].tolist() for x in range(size) for i in range(n)}
    if isinstance(w, RelationalDualWitness):
        out["sigma"] = {f"{x},{a}": w.sigma[x, a - 1].tolist() for x, a in w.f.support()}
    return out


def _vector_table(entries: dict, rows: int, cols: int, dim: int, name: str) -> np.ndarray:
    out = np.zeros((rows, cols, dim))
    for key, vec in entries.items():
        try:
            x, j = (int(s) for s in key.split(","))
        except ValueError as exc:
            raise ValueError(f"bad {name} key {key!r}") from exc
        if not (0 <= x < rows and 1 <= j <= cols):
            raise ValueError(f"{name} key {key!r} out of range")
        vec = np.asarray(vec, dtype=float)
        if vec.shape != (dim,):
            raise ValueError(f"{name}[{key}] has length {vec.size}, expected {dim}")
        out[x, j - 1] = vec
    return out


def _complete(entries: dict, rows: int, cols: int, name: str) -> None:
    missing = rows * cols - len(entries)
    if missing:
        raise ValueError(f"witness is missing {missing} {name} vectors")


def witness_from_json(data: dict, target: BooleanFunction | Relation):
    d = int(data["dim"])
    n, size = target.arity, target.size
    for name in ("u", "v"):
        _complete(data[name], size, n, name)
    u = _vector_table(data["u"], size, n, d, "u")
    v = _vector_table(data["v"], size, n, d, "v")
    if isinstance(target, BooleanFunction):
        return FunctionalDualWitness(target, u, v)
    sigma_entries = data.get("sigma", {})
    sd = len(next(iter(sigma_entries.values()))) if sigma_entries else 1
    sigma = _vector_table(sigma_entries, size, target.k, sd, "sigma")
    return RelationalDualWitness(target, u, v, sigma)


def load_target(data: dict) -> BooleanFunction | Relation:
    if "table" in data:
        return BooleanFunction.from_json(data)
    if "incidence" in data:
        return Relation.from_json(data)
    raise ValueError("payload is neither a function (table) nor a relation (incidence)")


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            return "nan"
        return v
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True)


def read_json(path: str | Path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def write_json(path: str | Path, obj) -> None:
    Path(path).write_text(dumps(obj) + "\n")
