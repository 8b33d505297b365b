"""Deterministic file output: CSV tables, JSON summaries, run manifests.

Identical inputs must produce byte-identical files, so nothing here writes
timestamps, environment data, or unordered collections.  Floats are
rendered with repr (shortest round-trip form).
"""

from __future__ import annotations

import hashlib
import json
import math
import os


def fmt(value) -> str:
    # note: numpy scalars subclass float/complex but repr differently
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return repr(float(value))
    if isinstance(value, complex):
        return repr(complex(value))
    return str(value)


def write_csv(path, header: list[str], rows) -> None:
    """RFC-4180-style CSV: comma separated, '.' decimal, LF line endings."""
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(v) for v in row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_dat(path, columns) -> None:
    """Two-or-more-column whitespace table (gnuplot-ready), no header."""
    rows = zip(*columns)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in rows:
            fh.write(" ".join(fmt(v) for v in row) + "\n")


def _jsonify(obj):
    """Recursively convert to JSON-safe types; non-finite floats become strings."""
    import enum

    import numpy as np

    if isinstance(obj, dict):
        return {str(k): _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        obj = float(obj)
    if isinstance(obj, float):
        if math.isfinite(obj):
            return obj
        return repr(obj)  # "inf", "-inf", "nan": JSON has no literals for these
    if isinstance(obj, complex):
        return {"re": _jsonify(obj.real), "im": _jsonify(obj.imag)}
    if isinstance(obj, np.ndarray):
        return [_jsonify(v) for v in obj.tolist()]
    return obj


def write_json(path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_jsonify(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


def sha256_of(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def file_inventory(directory, exclude=("manifest.json",)) -> list[dict]:
    """Sorted checksum listing of every file in a run directory."""
    entries = []
    for name in sorted(os.listdir(directory)):
        full = os.path.join(directory, name)
        if not os.path.isfile(full) or name in exclude:
            continue
        entries.append(
            {"name": name, "bytes": os.path.getsize(full), "sha256": sha256_of(full)}
        )
    return entries
