"""Decomposable network scores: log-BDe (BDeu prior) and BIC."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .counts import CountCache, Family, FamilyCounts, cached_family_counts
from .dataset import Dataset
from .graph import Dag, IllegalMove, Move
from .special import log_gamma

__all__ = [
    "BdeParams",
    "ScoreLedger",
    "ExactScorer",
    "log_gamma",
    "family_log_bde",
    "log_bde",
    "delta_log_bde",
    "family_log_bic",
    "log_bic",
]


@dataclass(frozen=True)
class BdeParams:
    """Equivalent sample size of the BDeu prior.

    For a family with ``q`` parent configurations and child arity ``r`` the
    pseudo-counts are ``ess / (q r)`` per cell and ``ess / q`` per row.
    """

    ess: float = 1.0

    def __post_init__(self):
        if not self.ess > 0:
            raise ValueError(f"ess must be positive, got {self.ess}")

    def cell_prior(self, n_configs: int, arity: int) -> float:
        return self.ess / (n_configs * arity)

    def row_prior(self, n_configs: int) -> float:
        return self.ess / n_configs


def family_log_bde(counts: FamilyCounts, p: BdeParams) -> float:
    q, r = counts.n_configs, counts.child_arity
    a_jk = p.cell_prior(q, r)
    a_j = r * a_jk
    if counts.counts.size == 0:
        return 0.0
    n_jk = counts.counts
    n_j = n_jk.sum(axis=1)
    # configurations with N_ij = 0 contribute exactly zero and are not stored
    row = gammaln(a_j) * len(n_j) - gammaln(a_j + n_j).sum()
    nz = n_jk[n_jk > 0]
    cell = gammaln(a_jk + nz).sum() - gammaln(a_jk) * nz.size
    return float(row + cell)


@dataclass
class ScoreLedger:
    """Per-child family scores of one graph; ``total`` is their sum."""

    families: list[Family]
    scores: list[float]

    @property
    def total(self) -> float:
        return math.fsum(self.scores)

    def family_score(self, child: int) -> float:
        return self.scores[child]

    def updated(self, child: int, family: Family, score: float) -> "ScoreLedger":
        families = list(self.families)
        scores = list(self.scores)
        families[child] = family
        scores[child] = score
        return ScoreLedger(families, scores)


def _check_graph(g: Dag, d: Dataset):
    if g.n != d.n:
        raise ValueError(f"graph has {g.n} nodes but data has {d.n} variables")


def log_bde(g: Dag, d: Dataset, p: BdeParams = BdeParams(), cache: CountCache | None = None) -> ScoreLedger:
    """Natural-log BDe score of ``g`` broken down by child family."""
    _check_graph(g, d)
    families = [Family(v, g.parents(v)) for v in range(g.n)]
    scores = [family_log_bde(cached_family_counts(cache, d, f), p) for f in families]
    return ScoreLedger(families, scores)


def delta_log_bde(
    g: Dag,
    ledger: ScoreLedger,
    move: Move,
    d: Dataset,
    p: BdeParams = BdeParams(),
    cache: CountCache | None = None,
) -> float:
    """log sc(G') - log sc(G) for a single-edge move, rescoring one family."""
    if not g.is_legal(move):
        raise IllegalMove(f"{move} is not legal on this graph")
    v = move.child
    fam = Family(v, g.parents_after(move))
    new = family_log_bde(cached_family_counts(cache, d, fam), p)
    return new - ledger.scores[v]


class ExactScorer:
    """log-BDe scorer with family-level memoisation, usable by greedy search."""

    tag = "exact"

    def __init__(self, d: Dataset, params: BdeParams = BdeParams(), cache: CountCache | None = None):
        self.dataset = d
        self.params = params
        self.cache = cache if cache is not None else CountCache(d)
        self._family_scores: dict[tuple[int, tuple[int, ...]], float] = {}

    def family(self, child: int, parents: tuple[int, ...]) -> float:
        key = (child, parents)
        s = self._family_scores.get(key)
        if s is None:
            fc = self.cache.get(Family(child, parents))
            s = family_log_bde(fc, self.params)
            self._family_scores[key] = s
        return s

    def score(self, g: Dag) -> float:
        _check_graph(g, self.dataset)
        return math.fsum(self.family(v, g.parents(v)) for v in range(g.n))

    def delta(self, g: Dag, move: Move) -> float:
        v = move.child
        return self.family(v, g.parents_after(move)) - self.family(v, g.parents(v))

    def ledger(self, g: Dag) -> ScoreLedger:
        return log_bde(g, self.dataset, self.params, self.cache)


def family_log_bic(counts: FamilyCounts, m: int) -> float:
    n_jk = counts.counts
    n_j = n_jk.sum(axis=1, keepdims=True)
    mask = n_jk > 0
    # 0 * ln(0 / x) is taken as 0
    loglik = float((n_jk[mask] * np.log((n_jk / np.maximum(n_j, 1))[mask])).sum())
    dof = (counts.child_arity - 1) * counts.n_configs
    return loglik - 0.5 * math.log(m) * dof


def log_bic(g: Dag, d: Dataset, cache: CountCache | None = None) -> float:
    _check_graph(g, d)
    return math.fsum(
        family_log_bic(cached_family_counts(cache, d, Family(v, g.parents(v))), d.m)
        for v in range(g.n)
    )
