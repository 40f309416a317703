"""Deterministic JSON/CSV rendering of result documents and measurement sampling."""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Any, Mapping, Sequence

import numpy as np


def _plain(value: Any) -> Any:
    if isinstance(value, Mapping):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        v = float(value)
        if not math.isfinite(v):
            return None
        return v
    if isinstance(value, (complex, np.complexfloating)):
        return {"re": float(value.real), "im": float(value.imag)}
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def to_json(doc: Mapping[str, Any]) -> str:
    # Python's float repr is the shortest string that round-trips exactly
    return json.dumps(_plain(doc), indent=2, sort_keys=False) + "\n"


def _flatten(prefix: str, value: Any, out: dict) -> None:
    if isinstance(value, Mapping):
        for k, v in value.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, out)
    elif isinstance(value, list):
        for i, v in enumerate(value):
            _flatten(f"{prefix}.{i}", v, out)
    else:
        out[prefix] = value


def _cell(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def to_csv(doc: Mapping[str, Any]) -> str:
    """Rows from ``doc["rows"]`` when present, else one flattened row."""
    plain = _plain(doc)
    rows: Sequence[Mapping[str, Any]]
    if isinstance(plain.get("rows"), list):
        rows = plain["rows"]
    else:
        flat: dict = {}
        _flatten("", plain, flat)
        rows = [flat]
    fields: list[str] = []
    for row in rows:
        for k in row:
            if k not in fields:
                fields.append(k)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fields)
    for row in rows:
        w.writerow([_cell(row.get(k)) for k in fields])
    return buf.getvalue()


def render(doc: Mapping[str, Any], fmt: str) -> str:
    if fmt == "json":
        return to_json(doc)
    if fmt == "csv":
        return to_csv(doc)
    raise ValueError(f"unknown output format {fmt!r}")


def sample_measurement(state: np.ndarray, seed: int, shots: int) -> dict[int, int]:
    """Histogram of ``shots`` computational-basis measurements (non-zero bins only)."""
    if shots < 1:
        raise ValueError("shots must be at least 1")
    p = np.abs(np.asarray(state)) ** 2
    p = p / p.sum()
    counts = np.random.default_rng(seed).multinomial(shots, p)
    return {int(i): int(c) for i, c in enumerate(counts) if c}
