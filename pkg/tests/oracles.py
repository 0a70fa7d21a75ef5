"""Independent reference computations used by the test-suite.

Nothing here imports the scoring or kernel code it checks.
"""

import itertools
import math
from fractions import Fraction

import numpy as np


def naive_counts(values, arities, child, parents):
    """Dict config -> per-child-value counts, by nested loops over rows."""
    parents = sorted(parents)
    table = {}
    for row in values:
        j, radix = 0, 1
        for p in parents:
            j += int(row[p]) * radix
            radix *= arities[p]
        table.setdefault(j, [0] * arities[child])[int(row[child])] += 1
    return table


def prequential_family(values, arities, child, parents, ess):
    """Sequential Dirichlet-multinomial predictive log-probability of one family.

    Each row is predicted from the rows before it:
    (cell prior + earlier rows in the same cell) / (row prior + earlier rows
    in the same configuration). No log-gamma involved.
    """
    parents = sorted(parents)
    q = math.prod(arities[p] for p in parents)
    r = arities[child]
    a_jk = ess / (q * r)
    a_j = ess / q
    seen_cell = {}
    seen_cfg = {}
    total = 0.0
    for row in values:
        j = tuple(int(row[p]) for p in parents)
        k = int(row[child])
        c = seen_cell.get((j, k), 0)
        n = seen_cfg.get(j, 0)
        total += math.log((a_jk + c) / (a_j + n))
        seen_cell[(j, k)] = c + 1
        seen_cfg[j] = n + 1
    return total


def prequential_graph(values, arities, parent_sets, ess):
    return sum(prequential_family(values, arities, v, ps, ess) for v, ps in enumerate(parent_sets))


def exact_rational_prequential(values, arities, child, parents, ess):
    """Same as prequential_family but in exact rationals (ess must be rational)."""
    parents = sorted(parents)
    q = math.prod(arities[p] for p in parents)
    r = arities[child]
    ess = Fraction(ess)
    a_jk, a_j = ess / (q * r), ess / q
    seen_cell, seen_cfg = {}, {}
    prob = Fraction(1)
    for row in values:
        j = tuple(int(row[p]) for p in parents)
        k = int(row[child])
        c, n = seen_cell.get((j, k), 0), seen_cfg.get(j, 0)
        prob *= (a_jk + c) / (a_j + n)
        seen_cell[(j, k)] = c + 1
        seen_cfg[j] = n + 1
    return prob


def naive_bic(values, arities, parent_sets):
    m = len(values)
    total = 0.0
    dof = 0
    for i, ps in enumerate(parent_sets):
        ps = sorted(ps)
        q = math.prod(arities[p] for p in ps)
        dof += (arities[i] - 1) * q
        for cfg in itertools.product(*[range(arities[p]) for p in ps]):
            rows = [r for r in values if all(r[p] == c for p, c in zip(ps, cfg))]
            n_j = len(rows)
            for k in range(arities[i]):
                n_jk = sum(1 for r in rows if r[i] == k)
                if n_jk:
                    total += n_jk * math.log(n_jk / n_j)
    return total - 0.5 * math.log(m) * dof


def dense_lml(X, y, w, jitter):
    """GP log evidence via explicit inverse and determinant."""
    K = (X * w) @ X.T + jitter * np.eye(len(y))
    Kinv = np.linalg.inv(K)
    sign, logdet = np.linalg.slogdet(K)
    assert sign > 0
    return -0.5 * y @ Kinv @ y - 0.5 * logdet - 0.5 * len(y) * math.log(2 * math.pi)


def central_difference(f, x, h=1e-5):
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def brute_reaches(edges, n, src, dst):
    """Reachability via Floyd-Warshall transitive closure."""
    R = np.zeros((n, n), dtype=bool)
    for u, v in edges:
        R[u, v] = True
    for k in range(n):
        R |= R[:, [k]] & R[[k], :]
    return bool(R[src, dst])
