"""Report, manifest and matrix CSV writers."""

from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path

import numpy as np


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isfinite(v):
            return v
        return "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")
    return obj


def dumps(obj) -> str:
    """Canonical JSON: sorted keys, no NaN literals, trailing newline."""
    return json.dumps(_clean(obj), sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def config_hash(config: dict) -> str:
    blob = json.dumps(_clean(config), sort_keys=True, separators=(",", ":"), allow_nan=False)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def write_json(path: Path, obj) -> None:
    Path(path).write_text(dumps(obj), encoding="utf-8")


def fmt(v: float) -> str:
    return format(float(v), ".17g")


def write_matrix_csv(path: Path, matrices) -> None:
    """Rows ``t,row,c1,...,cn`` for each ``(t, matrix)`` pair."""
    matrices = list(matrices)
    if not matrices:
        return
    n = np.asarray(matrices[0][1]).shape[0]
    lines = [",".join(["t", "row"] + [f"c{j + 1}" for j in range(n)])]
    for t, m in matrices:
        m = np.asarray(m, dtype=float)
        for i in range(n):
            lines.append(",".join([fmt(t), str(i + 1)] + [fmt(v) for v in m[i]]))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_matrix_csv(path: Path) -> list[tuple[float, np.ndarray]]:
    rows = Path(path).read_text(encoding="utf-8").strip().splitlines()[1:]
    out: dict[float, list] = {}
    for line in rows:
        parts = line.split(",")
        out.setdefault(float(parts[0]), []).append([float(v) for v in parts[2:]])
    return [(t, np.array(m)) for t, m in out.items()]
