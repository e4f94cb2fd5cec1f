"""CSV parsing against the documented column contracts."""

from __future__ import annotations

import csv
from pathlib import Path

from .errors import FigureError


def read_table(path, required: tuple[str, ...]) -> dict[str, list[str]]:
    """Parse a CSV into raw string columns. Required columns must be present;
    unknown columns are carried along untouched."""
    path = Path(path)
    if not path.exists():
        raise FigureError(f"input file not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FigureError(f"{path}: empty file, no header") from None
        missing = [c for c in required if c not in header]
        if missing:
            raise FigureError(f"{path}: missing required columns {missing}; found {header}")
        cols: dict[str, list[str]] = {c: [] for c in header}
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise FigureError(f"{path}: line {lineno} has {len(row)} fields, "
                                  f"expected {len(header)}")
            for c, value in zip(header, row):
                cols[c].append(value)
    if not next(iter(cols.values()), []):
        raise FigureError(f"{path}: no data rows")
    return cols


def float_column(cols: dict[str, list[str]], name: str, path) -> list[float]:
    out = []
    for i, raw in enumerate(cols[name], start=2):
        try:
            out.append(float(raw))
        except ValueError:
            raise FigureError(f"{path}: line {i}, column '{name}': "
                              f"cannot parse {raw!r} as a number") from None
    return out
