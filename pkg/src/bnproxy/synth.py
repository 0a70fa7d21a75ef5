"""Synthetic discrete Bayesian networks and forward sampling, for tests and benchmarks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .graph import Dag, sample_random_dag


@dataclass
class DiscreteNetwork:
    dag: Dag
    arities: tuple[int, ...]
    # cpts[v][j] is the child distribution for mixed-radix parent config j
    cpts: list[np.ndarray]

    def sample(self, m: int, seed=None) -> Dataset:
        rng = np.random.default_rng(seed)
        n = self.dag.n
        values = np.zeros((m, n), dtype=np.int64)
        for v in self.dag.topological_order():
            j = np.zeros(m, dtype=np.int64)
            radix = 1
            for p in self.dag.parents(v):
                j += values[:, p] * radix
                radix *= self.arities[p]
            cdf = np.cumsum(self.cpts[v], axis=1)[j]
            u = rng.random((m, 1))
            values[:, v] = np.minimum((u > cdf).sum(axis=1), self.arities[v] - 1)
        return Dataset(values, self.arities, tuple(f"x{i}" for i in range(n)))


def random_cpts(dag: Dag, arities, rng, concentration: float = 0.5) -> list[np.ndarray]:
    """Dirichlet(concentration) rows; small concentration gives strong dependencies."""
    cpts = []
    for v in range(dag.n):
        q = int(np.prod([arities[p] for p in dag.parents(v)], dtype=np.int64))
        cpts.append(rng.dirichlet(np.full(arities[v], concentration), size=q))
    return cpts


def chain_plus_edges(n: int, extra: int, seed=None) -> Dag:
    """A directed chain over a random order plus ``extra`` order-respecting edges."""
    rng = np.random.default_rng(seed)
    order = [int(x) for x in rng.permutation(n)]
    g = Dag(n, list(zip(order, order[1:])))
    candidates = [(order[a], order[b]) for a in range(n) for b in range(a + 2, n)]
    if extra > len(candidates):
        raise ValueError(f"cannot add {extra} extra edges to a chain of {n}")
    for k in rng.choice(len(candidates), size=extra, replace=False):
        g.add_edge(*candidates[int(k)])
    return g


def random_network(n: int, p: float, arity: int = 2, seed=None, concentration: float = 0.5, max_parents: int | None = 4) -> DiscreteNetwork:
    rng = np.random.default_rng(seed)
    dag = sample_random_dag(n, p, rng)
    if max_parents is not None:
        for v in range(n):
            ps = list(dag.parents(v))
            if len(ps) > max_parents:
                for u in rng.choice(ps, size=len(ps) - max_parents, replace=False):
                    dag.remove_edge(int(u), v)
    arities = (arity,) * n
    return DiscreteNetwork(dag, arities, random_cpts(dag, arities, rng, concentration))
