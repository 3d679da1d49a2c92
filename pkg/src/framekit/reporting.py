"""Report envelopes, JSON/CSV writers and file digests for the CLI."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from typing import Any, Iterable

import numpy as np

from . import __version__

TOOL = "framekit"


def _clean(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def dumps(obj: Any) -> str:
    return json.dumps(_clean(obj), indent=2, allow_nan=False) + "\n"


def digest(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return "sha256:" + h.hexdigest()


def envelope(command: str, config: dict, inputs: Iterable[str], report: dict) -> dict:
    return {
        "tool": TOOL,
        "version": __version__,
        "command": command,
        "config": config,
        "inputs": {p: digest(p) for p in inputs},
        "report": report,
    }


def csv_text(rows: list[dict]) -> str:
    if not rows:
        return ""
    fields: list[str] = []
    for r in rows:
        for k in r:
            if k not in fields:
                fields.append(k)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: _cell(r.get(k, "")) for k in fields})
    return buf.getvalue()


def _cell(v: Any) -> Any:
    v = _clean(v)
    if isinstance(v, list):
        return " ".join(str(x) for x in v)
    return v


def read_json(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def unwrap(data: dict) -> dict:
    """Accept either a bare report or a CLI envelope around it."""
    if isinstance(data, dict) and data.get("tool") == TOOL and "report" in data:
        return data["report"]
    return data
