"""Locale-independent writers for CSV, JSON and gnuplot ``.dat`` files.

Floats are written with ``repr`` (shortest round-trip form, always a '.'
decimal point); exact rationals become ``"num/den"`` strings.
"""

from __future__ import annotations

import csv
import enum
import json
import math
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .integrable.exact import GaussianRational, fraction_str


def format_value(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (Fraction, GaussianRational)):
        return fraction_str(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return repr(x)
    return str(x)


def to_jsonable(obj):
    """Recursively convert numpy, Fraction and enum values to JSON types."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, enum.Enum):
        return to_jsonable(obj.value)
    if isinstance(obj, (Fraction, GaussianRational)):
        return fraction_str(obj)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        # JSON has no inf/nan; keep them readable
        return x if math.isfinite(x) else format_value(x)
    if isinstance(obj, complex):
        return {"re": to_jsonable(obj.real), "im": to_jsonable(obj.imag)}
    if isinstance(obj, Path):
        return str(obj)
    return obj


def dumps_json(obj) -> str:
    return json.dumps(to_jsonable(obj), indent=2, sort_keys=True) + "\n"


def write_json(path: Path, obj) -> Path:
    path = Path(path)
    path.write_text(dumps_json(obj), encoding="utf-8")
    return path


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([format_value(v) for v in row])
    return path


def read_csv(path: Path) -> tuple[list[str], list[list[str]]]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def write_dat(path: Path, header: Sequence[str], blocks: Iterable[Iterable[Sequence]]) -> Path:
    """Whitespace separated columns; blank lines separate data blocks (gnuplot ``index``)."""
    path = Path(path)
    lines = ["# " + " ".join(header)]
    for k, block in enumerate(blocks):
        if k:
            lines += ["", ""]
        lines += [" ".join(format_value(v) for v in row) for row in block]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def write_table(path_stem: Path, header: Sequence[str], rows: Sequence[Sequence], fmt: str = "csv") -> Path:
    """Write ``rows`` as ``<stem>.csv`` or as a JSON list of records."""
    rows = list(rows)
    if fmt == "csv":
        return write_csv(Path(path_stem).with_suffix(".csv"), header, rows)
    if fmt == "json":
        records = [dict(zip(header, r)) for r in rows]
        return write_json(Path(path_stem).with_suffix(".json"), records)
    raise ValueError(f"unknown format {fmt!r}")
