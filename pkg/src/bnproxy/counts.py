"""Family contingency counts N_ijk / N_ij, with a canonical-key memo cache."""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .dataset import Dataset

# joint cell codes are int64; keep a margin below 2**63
_MAX_CELLS = 2**62
# dense bincount is used while the table is at most this many times m
_DENSE_FACTOR = 4


class FamilyTooLarge(OverflowError):
    """The parent configuration space does not fit in an int64 index."""


@dataclass(frozen=True)
class Family:
    """A child variable with a canonical (sorted, deduplicated) parent tuple."""

    child: int
    parents: tuple[int, ...] = ()

    def __post_init__(self):
        parents = tuple(sorted(set(int(p) for p in self.parents)))
        if self.child in parents:
            raise ValueError(f"variable {self.child} cannot be its own parent")
        object.__setattr__(self, "child", int(self.child))
        object.__setattr__(self, "parents", parents)

    @classmethod
    def of(cls, child: int, parents: Iterable[int] = ()) -> "Family":
        return cls(child, tuple(parents))


@dataclass(frozen=True, eq=False)
class FamilyCounts:
    """Sparse contingency table of one family.

    ``configs`` lists, in increasing order, the parent configurations that
    occur in the data; ``counts[r, k]`` is N_ijk for ``j = configs[r]``.
    Configuration indices are mixed-radix over the parent arities with the
    first (smallest-index) parent as the lowest digit.
    """

    family: Family
    child_arity: int
    n_configs: int
    configs: np.ndarray
    counts: np.ndarray

    @property
    def row_totals(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def m(self) -> int:
        return int(self.counts.sum())

    @property
    def config_counts(self) -> dict[int, np.ndarray]:
        return {int(j): row for j, row in zip(self.configs, self.counts)}

    def dense(self) -> np.ndarray:
        """Full ``n_configs x child_arity`` table; only for small families."""
        table = np.zeros((self.n_configs, self.child_arity), dtype=np.int64)
        table[self.configs] = self.counts
        return table

    def __eq__(self, other):
        if not isinstance(other, FamilyCounts):
            return NotImplemented
        return (
            self.family == other.family
            and self.child_arity == other.child_arity
            and self.n_configs == other.n_configs
            and np.array_equal(self.configs, other.configs)
            and np.array_equal(self.counts, other.counts)
        )

    __hash__ = None


def config_space_size(d: Dataset, parents: Iterable[int]) -> int:
    size = 1
    for p in parents:
        size *= d.arities[p]
    return size


def family_counts(d: Dataset, f: Family) -> FamilyCounts:
    """Count N_ijk for family ``f`` with one pass over the data."""
    for v in (f.child, *f.parents):
        if not 0 <= v < d.n:
            raise IndexError(f"variable index {v} out of range for n={d.n}")
    r = d.arities[f.child]
    q = config_space_size(d, f.parents)
    if q * r > _MAX_CELLS:
        raise FamilyTooLarge(
            f"family {f.child} <- {f.parents}: {q} parent configurations overflow"
        )

    code = np.zeros(d.m, dtype=np.int64)
    radix = 1
    for p in f.parents:
        if radix == 1:
            code = d.column(p).copy()
        else:
            code += d.column(p) * radix
        radix *= d.arities[p]
    cell = code * r + d.column(f.child)

    if q * r <= max(_DENSE_FACTOR * d.m, 1 << 12):
        table = np.bincount(cell, minlength=q * r).reshape(q, r)
        configs = np.flatnonzero(table.any(axis=1))
        counts = table[configs]
    else:
        cells, tally = np.unique(cell, return_counts=True)
        configs, row = np.unique(cells // r, return_inverse=True)
        counts = np.zeros((len(configs), r), dtype=np.int64)
        counts[row, cells % r] = tally
    configs = configs.astype(np.int64)
    configs.flags.writeable = False
    counts.flags.writeable = False
    return FamilyCounts(f, r, q, configs, counts)


class CountCache:
    """Memo of FamilyCounts keyed by canonical Family, bound to one dataset.

    Readers never block. Two threads racing on the same key both count and
    the first stored result wins; the results are identical either way.
    """

    def __init__(self, d: Dataset):
        self.dataset = d
        self._store: dict[Family, FamilyCounts] = {}
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def get(self, f: Family) -> FamilyCounts:
        hit = self._store.get(f)
        if hit is not None:
            self.hits += 1
            return hit
        self.misses += 1
        fc = family_counts(self.dataset, f)
        with self._lock:
            return self._store.setdefault(f, fc)

    def __len__(self):
        return len(self._store)

    def __contains__(self, f):
        return f in self._store

    def clear(self):
        with self._lock:
            self._store.clear()
        self.hits = self.misses = 0


def cached_family_counts(cache: CountCache | None, d: Dataset, f: Family) -> FamilyCounts:
    if cache is None:
        return family_counts(d, f)
    if cache.dataset is not d:
        raise ValueError("cache is bound to a different dataset")
    return cache.get(f)
