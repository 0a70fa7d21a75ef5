"""Random small (DAG, dataset) instances shared by several test modules."""

import numpy as np

from bnproxy import Dag, Dataset, sample_random_dag


def random_instance(rng, n_max=4, m_max=8, arity_max=3):
    n = int(rng.integers(1, n_max + 1))
    m = int(rng.integers(1, m_max + 1))
    arities = [int(a) for a in rng.integers(2, arity_max + 1, size=n)]
    values = np.column_stack([rng.integers(0, a, size=m) for a in arities])
    d = Dataset(values, tuple(arities), tuple(f"v{i}" for i in range(n)))
    g = sample_random_dag(n, float(rng.uniform(0, 1)), rng)
    return d, g


def parent_sets(g: Dag):
    return [g.parents(v) for v in range(g.n)]


def quad_dataset(quads, ess=1.0):
    """Binary data realising one integer quad per parent configuration.

    Column 0 is the child, column 1 the parent being added, columns 2.. the
    existing parents (configuration index mixed-radix, first parent lowest).
    Returns the data, the graph before the move, and the move.
    """
    from bnproxy import Move

    pc = (len(quads) - 1).bit_length()
    assert len(quads) == 2**pc
    rows = []
    for j, quad in enumerate(quads):
        bits = [(j >> i) & 1 for i in range(pc)]
        for (a, b), count in zip(((0, 0), (0, 1), (1, 0), (1, 1)), quad):
            rows += [[b, a] + bits] * int(count)
    if not rows:
        raise ValueError("all quads empty")
    n = 2 + pc
    d = Dataset(np.array(rows), (2,) * n, tuple(f"v{i}" for i in range(n)))
    g = Dag(n, [(2 + i, 0) for i in range(pc)])
    return d, g, Move("add", (1, 0))
