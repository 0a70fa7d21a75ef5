"""Directed acyclic graphs on a fixed ordered node set, and single-edge moves."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Literal

import numpy as np


class CycleError(ValueError):
    """A mutation would close a directed cycle."""


class IllegalMove(ValueError):
    """A move does not apply to the graph it was given."""


@dataclass(frozen=True, order=True)
class Move:
    kind: Literal["add", "delete"]
    edge: tuple[int, int]

    def __post_init__(self):
        if self.kind not in ("add", "delete"):
            raise ValueError(f"unknown move kind {self.kind!r}")
        u, v = self.edge
        object.__setattr__(self, "edge", (int(u), int(v)))

    @property
    def child(self) -> int:
        return self.edge[1]

    def inverse(self) -> "Move":
        return Move("delete" if self.kind == "add" else "add", self.edge)

    def __str__(self):
        sign = "+" if self.kind == "add" else "-"
        return f"{sign}{self.edge[0]}->{self.edge[1]}"


class Dag:
    """Mutable DAG; every edge insertion is checked for cycles."""

    __slots__ = ("n", "_parents", "_children")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] = ()):
        if n < 1:
            raise ValueError("a graph needs at least one node")
        self.n = int(n)
        self._parents: list[set[int]] = [set() for _ in range(self.n)]
        self._children: list[set[int]] = [set() for _ in range(self.n)]
        for u, v in edges:
            self.add_edge(u, v)

    def _check_pair(self, u, v):
        if not (0 <= u < self.n and 0 <= v < self.n):
            raise IndexError(f"edge ({u},{v}) out of range for n={self.n}")
        if u == v:
            raise ValueError(f"self-loop on node {u}")

    def parents(self, v: int) -> tuple[int, ...]:
        return tuple(sorted(self._parents[v]))

    def children(self, v: int) -> tuple[int, ...]:
        return tuple(sorted(self._children[v]))

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._children[u]

    @property
    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u in range(self.n) for v in sorted(self._children[u])]

    @property
    def n_edges(self) -> int:
        return sum(len(c) for c in self._children)

    def reaches(self, src: int, dst: int) -> bool:
        """Whether a directed path src -> ... -> dst exists."""
        if src == dst:
            return True
        seen = {src}
        stack = [src]
        children = self._children
        while stack:
            for w in children[stack.pop()]:
                if w == dst:
                    return True
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return False

    def creates_cycle(self, u: int, v: int) -> bool:
        self._check_pair(u, v)
        return self.reaches(v, u)

    def add_edge(self, u: int, v: int) -> None:
        self._check_pair(u, v)
        if self.has_edge(u, v):
            raise IllegalMove(f"edge {u}->{v} already present")
        if self.reaches(v, u):
            raise CycleError(f"adding {u}->{v} closes a cycle")
        self._children[u].add(v)
        self._parents[v].add(u)

    def remove_edge(self, u: int, v: int) -> None:
        self._check_pair(u, v)
        if not self.has_edge(u, v):
            raise IllegalMove(f"edge {u}->{v} not present")
        self._children[u].discard(v)
        self._parents[v].discard(u)

    def is_legal(self, move: Move) -> bool:
        u, v = move.edge
        if move.kind == "delete":
            return self.has_edge(u, v)
        return not self.has_edge(u, v) and not self.reaches(v, u)

    def apply(self, move: Move) -> None:
        u, v = move.edge
        if move.kind == "add":
            self.add_edge(u, v)
        else:
            self.remove_edge(u, v)

    def after(self, move: Move) -> "Dag":
        g = self.copy()
        g.apply(move)
        return g

    def parents_after(self, move: Move) -> tuple[int, ...]:
        """Parent tuple of ``move.child`` once ``move`` is applied."""
        u, v = move.edge
        ps = set(self._parents[v])
        if move.kind == "add":
            ps.add(u)
        else:
            ps.discard(u)
        return tuple(sorted(ps))

    def copy(self) -> "Dag":
        g = Dag.__new__(Dag)
        g.n = self.n
        g._parents = [set(p) for p in self._parents]
        g._children = [set(c) for c in self._children]
        return g

    def topological_order(self) -> list[int]:
        indeg = [len(p) for p in self._parents]
        ready = [v for v in range(self.n) if indeg[v] == 0]
        order = []
        while ready:
            v = ready.pop()
            order.append(v)
            for w in self._children[v]:
                indeg[w] -= 1
                if indeg[w] == 0:
                    ready.append(w)
        return order

    def is_acyclic(self) -> bool:
        return len(self.topological_order()) == self.n

    def __eq__(self, other):
        if not isinstance(other, Dag):
            return NotImplemented
        return self.n == other.n and self._parents == other._parents

    __hash__ = None

    def __repr__(self):
        return f"Dag(n={self.n}, edges={self.edges})"

    def to_json(self) -> dict:
        return {"n": self.n, "edges": [list(e) for e in self.edges]}

    @classmethod
    def from_json(cls, doc: dict) -> "Dag":
        return cls(int(doc["n"]), [tuple(e) for e in doc.get("edges", [])])

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh)

    @classmethod
    def load(cls, path) -> "Dag":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


def creates_cycle(g: Dag, edge: tuple[int, int]) -> bool:
    """True iff adding ``u -> v`` would close a directed cycle in ``g``."""
    u, v = edge
    return g.creates_cycle(u, v)


def enumerate_moves(g: Dag) -> list[Move]:
    """All legal single-edge moves, ordered by (u, v) lexicographically."""
    moves = []
    n = g.n
    # ancestors of u are exactly the v for which adding u->v is illegal
    for u in range(n):
        blocked = _ancestors(g, u)
        for v in range(n):
            if v == u:
                continue
            if g.has_edge(u, v):
                moves.append(Move("delete", (u, v)))
            elif v not in blocked:
                moves.append(Move("add", (u, v)))
    return moves


def _ancestors(g: Dag, v: int) -> set[int]:
    seen = set()
    stack = [v]
    while stack:
        for p in g._parents[stack.pop()]:
            if p not in seen:
                seen.add(p)
                stack.append(p)
    return seen


def sample_random_dag(n: int, p: float, seed=None) -> Dag:
    """Random order + independent order-respecting edges with probability p."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"edge probability {p} outside [0, 1]")
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(len(iu)) < p
    g = Dag(n)
    for a, b in zip(iu[keep], ju[keep]):
        u, v = int(order[a]), int(order[b])
        g._children[u].add(v)
        g._parents[v].add(u)
    return g


def default_edge_probability(n: int) -> float:
    return min(0.5, 4.0 / n) if n > 1 else 0.0


def edge_index(n: int, u: int, v: int) -> int:
    """Position of ordered pair (u, v) in the lexicographic list of pairs u != v."""
    if u == v:
        raise ValueError("no index for a self-loop")
    return u * (n - 1) + (v if v < u else v - 1)


def edge_pairs(n: int) -> list[tuple[int, int]]:
    return [(u, v) for u in range(n) for v in range(n) if u != v]


def edge_indicator(g: Dag) -> np.ndarray:
    bits = np.zeros(g.n * (g.n - 1), dtype=bool)
    for u, v in g.edges:
        bits[edge_index(g.n, u, v)] = True
    return bits


def dag_from_indicator(bits, n: int) -> Dag:
    bits = np.asarray(bits, dtype=bool)
    if bits.shape != (n * (n - 1),):
        raise ValueError(f"indicator length {bits.size} does not match n={n}")
    pairs = edge_pairs(n)
    return Dag(n, [pairs[i] for i in np.flatnonzero(bits)])
