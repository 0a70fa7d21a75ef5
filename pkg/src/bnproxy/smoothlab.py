"""Single-edge score jumps of log-BDe for binary variables.

A parent configuration ``j`` of the child (BDeu row prior ``lambda_j``) is
split by a new binary parent into ``j0``/``j1``. Its four counts are held in
``quad = (N00, N01, N10, N11)`` where ``Nab`` counts rows with new-parent
value ``a`` and child value ``b``. Everything here computes old-minus-new
(``sc - sc'``), so a positive value means the edge lowers the score.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, Sequence

import numpy as np

from .special import digamma, log_gamma

Pattern = Literal["uniform", "correspondence"]


def gamma_fn(a: float, b: float) -> float:
    """lnG(a + b) - lnG(a) - lnG(b), i.e. minus the log Beta function."""
    if not (a > 0 and b > 0):
        raise ValueError(f"gamma_fn needs positive arguments, got ({a}, {b})")
    # fixed evaluation order keeps gamma_fn(a, b) == gamma_fn(b, a) bitwise
    lo, hi = (a, b) if a <= b else (b, a)
    return log_gamma(lo + hi) - log_gamma(lo) - log_gamma(hi)


def gamma_asymptote_residual(a: float) -> float:
    """gamma_fn(a, a) minus its linear part 2 a ln 2; grows like 0.5 ln a."""
    if a < 1:
        raise ValueError("asymptote residual is defined for a >= 1")
    return gamma_fn(a, a) - 2.0 * math.log(2.0) * a


@dataclass(frozen=True)
class SmoothnessCase:
    lambda_j: float
    quad: tuple[float, float, float, float]
    alpha: float = field(init=False)
    beta: float = field(init=False)

    def __post_init__(self):
        if not self.lambda_j > 0:
            raise ValueError("lambda_j must be positive")
        quad = tuple(float(x) for x in self.quad)
        if len(quad) != 4 or any(x < 0 for x in quad):
            raise ValueError(f"quad must be four nonnegative counts, got {self.quad}")
        lam = self.lambda_j
        object.__setattr__(self, "quad", quad)
        object.__setattr__(self, "alpha", log_gamma(lam) - 2 * log_gamma(lam / 2))
        object.__setattr__(self, "beta", log_gamma(lam / 2) - 2 * log_gamma(lam / 4))

    @property
    def total(self) -> float:
        return sum(self.quad)

    @classmethod
    def uniform(cls, lambda_j: float, N: float) -> "SmoothnessCase":
        return cls(lambda_j, (N / 4,) * 4)

    @classmethod
    def correspondence(cls, lambda_j: float, N: float) -> "SmoothnessCase":
        return cls(lambda_j, (N / 2, 0.0, 0.0, N / 2))

    @classmethod
    def build(cls, pattern: Pattern, lambda_j: float, N: float) -> "SmoothnessCase":
        if pattern == "uniform":
            return cls.uniform(lambda_j, N)
        if pattern == "correspondence":
            return cls.correspondence(lambda_j, N)
        raise ValueError(f"unknown pattern {pattern!r}")


def term_t(case: SmoothnessCase) -> float:
    lam = case.lambda_j
    n00, n01, n10, n11 = case.quad
    return (
        gamma_fn(lam / 4 + n00, lam / 4 + n10)
        + gamma_fn(lam / 4 + n01, lam / 4 + n11)
        - gamma_fn(lam / 2 + n00 + n01, lam / 2 + n10 + n11)
    )


def case_delta(case: SmoothnessCase, parent_count: int = 0, configs: Sequence[SmoothnessCase] | None = None) -> float:
    """sc - sc' for adding a binary parent to a child with ``parent_count`` parents.

    ``case`` fixes lambda_j (and so alpha, beta); ``configs`` gives the
    quad of each of the ``2**parent_count`` existing configurations and
    defaults to ``case`` repeated.
    """
    size = 2**parent_count
    if configs is None:
        configs = [case] * size
    if len(configs) != size:
        raise ValueError(f"{len(configs)} configurations for {parent_count} parents (need {size})")
    for c in configs:
        if c.lambda_j != case.lambda_j:
            raise ValueError("all configurations must share lambda_j")
    const = size * (case.alpha - 2 * case.beta)
    return const + math.fsum(term_t(c) for c in configs)


def _psi_terms(case: SmoothnessCase):
    lam = case.lambda_j
    n = case.quad
    N = dict(zip(("00", "01", "10", "11"), n))
    cell = {ab: digamma(lam / 4 + N[ab]) for ab in N}
    # psi_{a0,a1}: same new-parent value; psi_{0b,1b}: same child value
    row = {a: digamma(lam / 2 + N[a + "0"] + N[a + "1"]) for a in "01"}
    col = {b: digamma(lam / 2 + N["0" + b] + N["1" + b]) for b in "01"}
    whole = digamma(lam + sum(n))
    return cell, row, col, whole


def t_gradient(case: SmoothnessCase) -> np.ndarray:
    """dt/dN_ab for ab in (00, 01, 10, 11): -psi_ab + psi_{a0,a1} + psi_{0b,1b} - psi."""
    cell, row, col, whole = _psi_terms(case)
    return np.array([-cell[a + b] + row[a] + col[b] - whole for a in "01" for b in "01"])


def stationarity_residual(case: SmoothnessCase) -> np.ndarray:
    """Residuals (lhs - rhs) of the four pairwise-difference stationarity equations.

    Setting all four partials of t to zero and subtracting pairs gives
        psi_00 - psi_01 = psi_{00,10} - psi_{01,11}
        psi_00 - psi_10 = psi_{00,01} - psi_{10,11}
        psi_01 - psi_11 = psi_{00,01} - psi_{10,11}
        psi_10 - psi_11 = psi_{00,10} - psi_{01,11}
    Zero residuals mean the four partials are equal, i.e. t is stationary
    for a fixed configuration total.
    """
    cell, row, col, _ = _psi_terms(case)
    return np.array([
        (cell["00"] - cell["01"]) - (col["0"] - col["1"]),
        (cell["00"] - cell["10"]) - (row["0"] - row["1"]),
        (cell["01"] - cell["11"]) - (row["0"] - row["1"]),
        (cell["10"] - cell["11"]) - (col["0"] - col["1"]),
    ])


def is_boundary(case: SmoothnessCase) -> bool:
    """True when some count is zero, i.e. the case sits on the edge of the count domain."""
    return any(x == 0 for x in case.quad)


@dataclass
class SweepResult:
    pattern: str
    lambda_j: float
    parent_count: int
    N: list[float]
    delta: list[float]
    slope: float
    intercept: float
    r2: float

    def summary(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "r2": self.r2,
            "pattern": self.pattern,
            "lambda": self.lambda_j,
        }

    def write(self, outdir) -> None:
        outdir = Path(outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        with open(outdir / "sweep.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["N", "delta"])
            for N, d in zip(self.N, self.delta):
                w.writerow([repr(N), repr(d)])
        with open(outdir / "summary.json", "w", encoding="utf-8") as fh:
            json.dump(self.summary(), fh, indent=2)


def lipschitz_sweep(pattern: Pattern, lambda_j: float, N_grid: Sequence[float], parent_count: int = 0) -> SweepResult:
    """Fit |sc - sc'| ~ a ln N + b across sample sizes for an extremal pattern."""
    grid = [float(N) for N in N_grid]
    if len(grid) < 4:
        raise ValueError("need at least four grid points")
    if any(N <= 0 for N in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("grid must be positive and strictly increasing")
    deltas = [case_delta(SmoothnessCase.build(pattern, lambda_j, N), parent_count) for N in grid]
    x = np.log(grid)
    y = np.abs(deltas)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - float((resid**2).sum()) / ss_tot if ss_tot > 0 else 1.0
    return SweepResult(pattern, lambda_j, parent_count, grid, deltas, float(slope), float(intercept), r2)
