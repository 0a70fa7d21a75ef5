"""Discrete observation matrices and their variable metadata."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np


class DatasetError(ValueError):
    """Raised when observations or arity declarations are malformed."""


@dataclass(frozen=True, eq=False)
class Dataset:
    """An m x n matrix of category codes plus per-column arity.

    Codes are dense integers ``0 .. arity-1``. The array is stored read-only
    so a Dataset can be shared freely between scorers.
    """

    values: np.ndarray
    arities: tuple[int, ...]
    names: tuple[str, ...]

    def __post_init__(self):
        values = np.array(self.values, dtype=np.int64, copy=True)
        if values.ndim != 2:
            raise DatasetError("values must be a 2-d matrix")
        m, n = values.shape
        if m < 1 or n < 1:
            raise DatasetError(f"need at least one row and one column, got {m}x{n}")
        arities = tuple(int(a) for a in self.arities)
        names = tuple(str(s) for s in self.names)
        if len(arities) != n:
            raise DatasetError(f"{len(arities)} arities for {n} columns")
        if len(names) != n:
            raise DatasetError(f"{len(names)} names for {n} columns")
        for c, a in enumerate(arities):
            if a < 2:
                raise DatasetError(f"column {names[c]!r}: arity {a} < 2")
        if values.min() < 0:
            r, c = np.argwhere(values < 0)[0]
            raise DatasetError(f"row {r}, column {names[c]!r}: negative code")
        over = values >= np.asarray(arities)
        if over.any():
            r, c = np.argwhere(over)[0]
            raise DatasetError(
                f"row {r}, column {names[c]!r}: value {values[r, c]} "
                f"not below declared arity {arities[c]}"
            )
        values.flags.writeable = False
        # column-major copy keeps per-family gathers contiguous
        columns = np.ascontiguousarray(values.T)
        columns.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "arities", arities)
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "_columns", columns)

    @property
    def m(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]

    def column(self, i: int) -> np.ndarray:
        return self._columns[i]

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.arities == other.arities
            and self.names == other.names
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None

    @classmethod
    def from_array(cls, values, arities=None, names=None) -> "Dataset":
        values = np.asarray(values, dtype=np.int64)
        if values.ndim != 2:
            raise DatasetError("values must be a 2-d matrix")
        n = values.shape[1]
        if arities is None:
            arities = [max(2, int(values[:, c].max()) + 1) for c in range(n)]
        if names is None:
            names = [f"x{c}" for c in range(n)]
        return cls(values, tuple(arities), tuple(names))


def _resolve_arities(names, values, arity_spec):
    inferred = [int(values[:, c].max()) + 1 for c in range(len(names))]
    if arity_spec is None:
        # a column observed at a single value still needs two categories
        return [max(2, a) for a in inferred]
    if isinstance(arity_spec, Mapping):
        unknown = set(arity_spec) - set(names)
        if unknown:
            raise DatasetError(f"arity given for unknown variables: {sorted(unknown)}")
        declared = [arity_spec.get(name) for name in names]
    else:
        declared = list(arity_spec)
        if len(declared) != len(names):
            raise DatasetError(f"{len(declared)} arities for {len(names)} columns")
    arities = []
    for name, seen, a in zip(names, inferred, declared):
        if a is None:
            arities.append(max(2, seen))
            continue
        a = int(a)
        if a <= seen - 1:
            raise DatasetError(
                f"column {name!r}: declared arity {a} but observed value {seen - 1}"
            )
        arities.append(a)
    return arities


def load_arity_sidecar(path) -> dict[str, int]:
    with open(path, encoding="utf-8") as fh:
        spec = json.load(fh)
    if not isinstance(spec, dict):
        raise DatasetError(f"{path}: arity sidecar must be a JSON object")
    return {str(k): int(v) for k, v in spec.items()}


def load_csv(path, arity_spec: Mapping[str, int] | Sequence[int] | None = None) -> Dataset:
    """Read a header + integer-code CSV file.

    ``arity_spec`` may be a name -> arity mapping (as read from a JSON
    sidecar) or a sequence aligned with the columns. Columns without a
    declaration get ``max observed + 1``.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetError(f"{path}: empty file") from None
        names = [h.strip() for h in header]
        if not names or any(not h for h in names):
            raise DatasetError(f"{path}: header has blank variable names")
        if len(set(names)) != len(names):
            raise DatasetError(f"{path}: duplicate variable names in header")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(names):
                raise DatasetError(
                    f"{path}: row {lineno} has {len(row)} fields, expected {len(names)}"
                )
            parsed = []
            for c, cell in enumerate(row):
                cell = cell.strip()
                if cell == "":
                    raise DatasetError(
                        f"{path}: row {lineno}, column {names[c]!r}: missing value"
                    )
                try:
                    v = int(cell)
                except ValueError:
                    raise DatasetError(
                        f"{path}: row {lineno}, column {names[c]!r}: "
                        f"{cell!r} is not an integer"
                    ) from None
                if v < 0:
                    raise DatasetError(
                        f"{path}: row {lineno}, column {names[c]!r}: negative value {v}"
                    )
                parsed.append(v)
            rows.append(parsed)
    if not rows:
        raise DatasetError(f"{path}: no data rows")
    values = np.array(rows, dtype=np.int64)
    arities = _resolve_arities(names, values, arity_spec)
    return Dataset(values, tuple(arities), tuple(names))


def write_csv(d: Dataset, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(d.names)
        writer.writerows(d.values.tolist())


def column_marginal(d: Dataset, i: int) -> np.ndarray:
    """Per-category counts of column ``i``; always sums to ``d.m``."""
    if not 0 <= i < d.n:
        raise IndexError(f"variable index {i} out of range for n={d.n}")
    return np.bincount(d.column(i), minlength=d.arities[i])
