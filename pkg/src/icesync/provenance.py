"""Provenance headers and plain CSV/JSON writers shared by all emitters.

Every CSV starts with one ``# {...}`` comment line carrying a JSON object
(tool version, config hash, seed, ...); readers skip ``#`` lines. JSON
artifacts carry the same object under the ``provenance`` key.
"""
from __future__ import annotations

import csv
import hashlib
import json
import platform
from pathlib import Path
from typing import Iterable

import numpy as np

from . import __version__

__all__ = ["config_hash", "make_provenance", "write_csv", "read_csv", "read_provenance", "write_json", "read_json"]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, float) and not np.isfinite(obj):
        return None
    return obj


def config_hash(config: dict) -> str:
    blob = json.dumps(_jsonable(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def make_provenance(config: dict | None = None, seed: int | None = None, **extra) -> dict:
    config = config or {}
    out = {
        "tool": "icesync",
        "version": __version__,
        "config_hash": config_hash(config),
        "seed": seed,
        "numpy": np.__version__,
        "python": platform.python_version(),
    }
    out.update(extra)
    return _jsonable(out)


def write_csv(path, header: Iterable[str], rows: Iterable, provenance: dict | None = None) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        if provenance is not None:
            fh.write("# " + json.dumps(_jsonable(provenance), sort_keys=True) + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(header))
        for r in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    """Returns (header, rows) with the provenance comment skipped."""
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    rd = csv.reader(lines)
    header = next(rd)
    return header, [r for r in rd if r]


def read_provenance(path) -> dict | None:
    with open(path) as fh:
        first = fh.readline()
    return json.loads(first[2:]) if first.startswith("# ") else None


def write_json(path, payload: dict, provenance: dict | None = None) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    body = dict(payload)
    if provenance is not None:
        body = {"provenance": provenance, **body}
    path.write_text(json.dumps(_jsonable(body), indent=2, sort_keys=False) + "\n")


def read_json(path) -> dict:
    return json.loads(Path(path).read_text())
