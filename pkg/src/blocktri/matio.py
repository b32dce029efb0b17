"""Matrix and report files: exact round-trips, atomic writes.

Matrices travel as JSON documents {"rows": r, "cols": c, "entries":
[[re, im], ...]} with entries flat in row-major order.  Floats are
serialized through repr, which round-trips every finite double exactly,
so read(write(m)) == m bitwise.  All writes go through a temp file plus
rename, so readers never observe a partial file.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile

import numpy as np

from .linalg import ComplexMatrix, _as_array

__all__ = [
    "MatrixFormatError",
    "read_matrix",
    "write_matrix",
    "matrix_document",
    "write_report",
    "render_report",
]


class MatrixFormatError(ValueError):
    """Malformed matrix file; carries path and, for syntax errors, line/column."""

    def __init__(self, message, *, path=None, line=None, column=None):
        where = str(path) if path is not None else "matrix data"
        if line is not None:
            where += f":{line}"
            if column is not None:
                where += f":{column}"
        super().__init__(f"{where}: {message}")
        self.path = path
        self.line = line
        self.column = column


def _is_number(x):
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _require(cond, message, path):
    if not cond:
        raise MatrixFormatError(message, path=path)


def read_matrix(path):
    """Parse a matrix document; returns a ComplexMatrix.

    Raises ``MatrixFormatError`` for syntax errors (with line/column), a
    missing or non-integer header, an entry count that disagrees with
    rows*cols, entries that are not [re, im] number pairs, or non-finite
    values.  OS-level failures (missing file, permissions) propagate as
    ``OSError``.
    """
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MatrixFormatError(
            f"invalid JSON: {exc.msg}", path=path, line=exc.lineno, column=exc.colno
        ) from exc
    _require(isinstance(doc, dict), "top level must be an object", path)
    for key in ("rows", "cols", "entries"):
        _require(key in doc, f"missing field {key!r}", path)
    rows, cols = doc["rows"], doc["cols"]
    for name, value in (("rows", rows), ("cols", cols)):
        _require(
            isinstance(value, int) and not isinstance(value, bool) and value >= 1,
            f"{name} must be a positive integer, got {value!r}",
            path,
        )
    entries = doc["entries"]
    _require(isinstance(entries, list), "entries must be an array", path)
    _require(
        len(entries) == rows * cols,
        f"expected {rows * cols} entries for {rows}x{cols}, got {len(entries)}",
        path,
    )
    data = np.empty(rows * cols, dtype=np.complex128)
    for i, pair in enumerate(entries):
        _require(
            isinstance(pair, list) and len(pair) == 2 and all(_is_number(v) for v in pair),
            f"entry {i} must be a [re, im] number pair, got {pair!r}",
            path,
        )
        re, im = float(pair[0]), float(pair[1])
        _require(
            math.isfinite(re) and math.isfinite(im),
            f"entry {i} is not finite: {pair!r}",
            path,
        )
        data[i] = complex(re, im)
    return ComplexMatrix(data.reshape(rows, cols))


def _atomic_write_text(path, text):
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".partial-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def matrix_document(m):
    """Matrix as a plain dict in the file schema (rows, cols, flat entries)."""
    arr = _as_array(m)
    entries = [[float(v.real), float(v.imag)] for v in arr.reshape(-1)]
    return {"rows": int(arr.shape[0]), "cols": int(arr.shape[1]), "entries": entries}


def write_matrix(m, path):
    """Serialize a matrix to ``path``; read_matrix inverts this bit-exactly."""
    _atomic_write_text(path, json.dumps(matrix_document(m)) + "\n")


def write_report(doc, path, fmt="json"):
    """Write a report document as pretty JSON or flatten its level table to CSV.

    JSON output sorts keys, so identical documents serialize identically.
    CSV emits only ``doc["levels"]`` (a list of flat row dicts); columns
    are the sorted union of row keys, absent cells stay empty.
    """
    _atomic_write_text(path, render_report(doc, fmt))


def render_report(doc, fmt="json"):
    if fmt == "json":
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if fmt != "csv":
        raise ValueError(f"unknown report format {fmt!r}")
    rows = doc.get("levels")
    if not isinstance(rows, list):
        raise ValueError("csv output needs a 'levels' list in the report")
    fieldnames = sorted({key for row in rows for key in row})
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fieldnames, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: ("" if v is None else v) for k, v in row.items()})
    return buf.getvalue()
