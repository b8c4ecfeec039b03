"""JSON matrix-set documents.

Schema::

    {"d": 2,
     "matrices": [[[1, 0], [0, [0.5, -1]]], ...],
     "labels": ["A", ...]}          # optional

Each entry is a real number or an ``[re, im]`` pair.
"""

from __future__ import annotations

import json
import math
import sys
from dataclasses import dataclass
from numbers import Real

import numpy as np

from .semigroup import MatrixSet

__all__ = ["InputDocument", "InputError", "dumps", "load", "loads", "parse"]


class InputError(ValueError):
    """Malformed input document; ``field`` names the offending location."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass
class InputDocument:
    d: int
    matrices: list[np.ndarray]
    labels: list[str] | None = None

    def to_matrix_set(self) -> MatrixSet:
        return MatrixSet(self.matrices, self.labels)

    def to_obj(self) -> dict:
        obj = {"d": self.d, "matrices": [[[_entry_out(z) for z in row] for row in m]
                                         for m in self.matrices]}
        if self.labels is not None:
            obj["labels"] = list(self.labels)
        return obj

    def __eq__(self, other) -> bool:
        if not isinstance(other, InputDocument):
            return NotImplemented
        return (self.d == other.d and self.labels == other.labels
                and len(self.matrices) == len(other.matrices)
                and all(np.array_equal(a, b) for a, b in zip(self.matrices, other.matrices)))


def _entry_out(z: complex):
    z = complex(z)
    return z.real if z.imag == 0 else [z.real, z.imag]


def _number(x, where: str) -> float:
    if isinstance(x, bool) or not isinstance(x, Real):
        raise InputError(where, f"expected a number, got {type(x).__name__}")
    v = float(x)
    if not math.isfinite(v):
        raise InputError(where, "entry is not finite")
    return v


def _entry(x, where: str) -> complex:
    if isinstance(x, (list, tuple)):
        if len(x) != 2:
            raise InputError(where, "complex entries must be [re, im] pairs")
        return complex(_number(x[0], where + "[0]"), _number(x[1], where + "[1]"))
    return complex(_number(x, where), 0.0)


def parse(obj) -> InputDocument:
    if not isinstance(obj, dict):
        raise InputError("document", "expected a JSON object")
    if "d" not in obj:
        raise InputError("d", "missing")
    d = obj["d"]
    if isinstance(d, bool) or not isinstance(d, int) or d < 1:
        raise InputError("d", f"expected a positive integer, got {d!r}")
    grids = obj.get("matrices")
    if not isinstance(grids, list) or not grids:
        raise InputError("matrices", "expected a nonempty list of matrices")
    mats = []
    for i, grid in enumerate(grids):
        where = f"matrices[{i}]"
        if not isinstance(grid, list) or len(grid) != d:
            raise InputError(where, f"expected {d} rows")
        m = np.empty((d, d), dtype=np.complex128)
        for a, row in enumerate(grid):
            if not isinstance(row, list) or len(row) != d:
                raise InputError(f"{where}[{a}]", f"expected {d} entries")
            for b, x in enumerate(row):
                m[a, b] = _entry(x, f"{where}[{a}][{b}]")
        mats.append(m)
    labels = obj.get("labels")
    if labels is not None:
        if not isinstance(labels, list) or len(labels) != len(mats):
            raise InputError("labels", "expected one label per matrix")
        if not all(isinstance(x, str) for x in labels):
            raise InputError("labels", "labels must be strings")
    return InputDocument(d, mats, labels)


def loads(text: str) -> InputDocument:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError("document", f"invalid JSON ({exc})") from None
    return parse(obj)


def load(path: str) -> InputDocument:
    if path == "-":
        return loads(sys.stdin.read())
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError("file", str(exc)) from None
    return loads(text)


def dumps(doc: InputDocument, **kwargs) -> str:
    return json.dumps(doc.to_obj(), **kwargs)
