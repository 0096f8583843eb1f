"""Matrix files: a small JSON layout for typed objects, CSV for tables.

The JSON layout is one object per file:

    {
      "kind": "covariance" | "precision" | "partial" | "marginal",
      "dim": d,
      "labels": ["x1", ...],
      "data": [[row 0 ...], ..., [row d-1 ...]],
      "scale": [...],          # partial kind only, optional
      "provenance": {...}      # optional, free-form, round-tripped
    }

``data`` is row-major.  Floats are written with Python's shortest
round-trip representation, so saving the same object twice produces
byte-identical files.  CSV files carry a bare d x d table with no
header; their kind travels out of band (a flag, for the command-line
tools).
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import FileFormatError
from .matrices import (
    CovarianceMatrix,
    MarginalCorrelationMatrix,
    PartialCorrelationGraph,
    PrecisionMatrix,
)

KINDS = ("covariance", "precision", "partial", "marginal")

__all__ = [
    "KINDS",
    "kind_of",
    "matrix_from_kind",
    "save_matrix",
    "load_matrix",
    "load_csv_matrix",
    "save_csv_table",
]

_KIND_BY_TYPE = {
    CovarianceMatrix: "covariance",
    PrecisionMatrix: "precision",
    PartialCorrelationGraph: "partial",
    MarginalCorrelationMatrix: "marginal",
}


def kind_of(obj) -> str:
    """The JSON kind string for a matrix object."""
    try:
        return _KIND_BY_TYPE[type(obj)]
    except KeyError:
        raise TypeError(f"no file kind for {type(obj).__name__}") from None


def matrix_from_kind(kind: str, data, labels=None, scale=None):
    """Build the typed object named by ``kind`` from raw parts.

    Validation runs in the type constructors; a bad kind raises
    :class:`FileFormatError`.
    """
    if kind == "covariance":
        return CovarianceMatrix(np.asarray(data, dtype=float), labels=labels)
    if kind == "precision":
        return PrecisionMatrix(np.asarray(data, dtype=float), labels=labels)
    if kind == "partial":
        return PartialCorrelationGraph(
            np.asarray(data, dtype=float), scale=scale, labels=labels
        )
    if kind == "marginal":
        return MarginalCorrelationMatrix(np.asarray(data, dtype=float), labels=labels)
    raise FileFormatError(f"unknown matrix kind {kind!r}; expected one of {KINDS}")


def save_matrix(obj, path, provenance: dict | None = None) -> None:
    """Write a typed matrix object to ``path`` in the JSON layout."""
    kind = kind_of(obj)
    entries = obj.weights if kind == "partial" else obj.entries
    doc = {
        "kind": kind,
        "dim": int(entries.shape[0]),
        "labels": list(
            obj.labels
            if obj.labels is not None
            else (f"x{k + 1}" for k in range(entries.shape[0]))
        ),
        "data": [[float(x) for x in row] for row in entries],
    }
    if kind == "partial" and obj.scale is not None:
        doc["scale"] = [float(x) for x in obj.scale]
    if provenance is not None:
        doc["provenance"] = provenance
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def load_matrix(path):
    """Read a JSON matrix file, returning (object, provenance).

    The object is validated on construction; a structurally broken file
    raises :class:`FileFormatError`.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise FileFormatError(f"{path}: expected a JSON object at top level")
    for key in ("kind", "dim", "data"):
        if key not in doc:
            raise FileFormatError(f"{path}: missing required key {key!r}")
    data = np.asarray(doc["data"], dtype=float)
    if data.ndim != 2 or data.shape[0] != data.shape[1]:
        raise FileFormatError(f"{path}: data is not a square table")
    if data.shape[0] != int(doc["dim"]):
        raise FileFormatError(
            f"{path}: dim says {doc['dim']} but data is {data.shape[0]} wide"
        )
    obj = matrix_from_kind(
        doc["kind"], data, labels=doc.get("labels"), scale=doc.get("scale")
    )
    return obj, doc.get("provenance")


def load_csv_matrix(path, kind: str):
    """Read a bare d x d CSV table as the matrix type named by ``kind``."""
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for line in csv.reader(fh):
            if not line:
                continue
            try:
                rows.append([float(cell) for cell in line])
            except ValueError as exc:
                raise FileFormatError(f"{path}: non-numeric cell: {exc}") from exc
    if not rows or any(len(row) != len(rows) for row in rows):
        raise FileFormatError(f"{path}: expected a square numeric table")
    return matrix_from_kind(kind, np.asarray(rows, dtype=float))


def save_csv_table(path, header, rows) -> None:
    """Write a CSV table with one header line and float-ready rows."""
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(x)) if isinstance(x, float) else x for x in row])
