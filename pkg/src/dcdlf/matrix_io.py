"""CSV interchange for matrices, diagnostics tables, and run manifests.

Matrices are written as plain numeric CSV at 17 significant digits so every
float64 round-trips losslessly.  Loading auto-detects an optional header row
(non-numeric first row) and an optional leading column of variable names.
"""

from __future__ import annotations

import csv
import hashlib
from pathlib import Path

import numpy as np

from .core import InputError, ViewMatrix

FLOAT_FMT = "%.17g"


def _try_float(cell: str) -> float | None:
    try:
        value = float(cell)
    except ValueError:
        return None
    return value


def load_matrix_csv(path) -> ViewMatrix:
    """Load a matrix CSV: rows = variables, columns = samples.

    Raises InputError for missing/empty files, ragged rows (with the line
    number), or non-numeric cells outside the header/name positions.
    """
    path = Path(path)
    if not path.is_file():
        raise InputError(f"no such file: {path}")
    with path.open(newline="") as fh:
        rows = [(i + 1, row) for i, row in enumerate(csv.reader(fh)) if row]
    if not rows:
        raise InputError(f"{path}: file is empty")

    width = len(rows[0][1])
    for lineno, row in rows:
        if len(row) != width:
            raise InputError(
                f"{path}: ragged CSV at line {lineno}: expected {width} "
                f"fields, got {len(row)}"
            )

    # A name column exists when any row past the first has a non-numeric
    # first cell; a header exists when the first row has any non-numeric
    # cell outside that name column.
    body = rows[1:] if len(rows) > 1 else rows
    has_names = any(_try_float(row[0]) is None for _, row in body)
    data_start_col = 1 if has_names else 0
    first_cells = rows[0][1][data_start_col:]
    has_header = any(_try_float(cell) is None for cell in first_cells)
    if has_header and len(rows) == 1:
        raise InputError(f"{path}: header only, no data rows")

    data_rows = rows[1:] if has_header else rows
    if not data_rows:
        raise InputError(f"{path}: no data rows")
    names: list[str] = []
    values = np.empty((len(data_rows), width - data_start_col))
    for i, (lineno, row) in enumerate(data_rows):
        if has_names:
            names.append(row[0])
        for j, cell in enumerate(row[data_start_col:]):
            value = _try_float(cell)
            if value is None:
                raise InputError(
                    f"{path}: non-numeric cell {cell!r} at line {lineno}, "
                    f"field {data_start_col + j + 1}"
                )
            values[i, j] = value
    return ViewMatrix(values, names=tuple(names) if has_names else None)


def save_matrix_csv(path, values: np.ndarray) -> None:
    """Write a plain numeric matrix CSV at full float64 precision.

    An empty matrix (zero rows) produces an empty file.
    """
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        Path(path).write_text("")
        return
    arr = np.atleast_2d(arr)
    with Path(path).open("w", newline="") as fh:
        for row in arr:
            fh.write(",".join(FLOAT_FMT % v for v in row))
            fh.write("\n")


def save_table_csv(path, header: list[str], rows) -> None:
    """Write a small labeled table; floats at full precision."""
    with Path(path).open("w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            cells = [
                FLOAT_FMT % v if isinstance(v, float) else str(v) for v in row
            ]
            fh.write(",".join(cells) + "\n")


def save_manifest(path, entries: dict) -> None:
    """Write a key=value manifest, one entry per line, insertion order."""
    with Path(path).open("w") as fh:
        for key, value in entries.items():
            fh.write(f"{key}={value}\n")


def load_manifest(path) -> dict[str, str]:
    path = Path(path)
    if not path.is_file():
        raise InputError(f"no such file: {path}")
    entries: dict[str, str] = {}
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"{path}: line {lineno} is not key=value")
        key, _, value = line.partition("=")
        entries[key] = value
    return entries


def file_digest(path) -> str:
    """SHA-256 hex digest of a file's bytes."""
    h = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()
