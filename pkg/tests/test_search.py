import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bnproxy.dataset import Dataset
from bnproxy.graph import (
    CycleError,
    Dag,
    IllegalMove,
    Move,
    creates_cycle,
    dag_from_indicator,
    edge_index,
    edge_indicator,
    edge_pairs,
    enumerate_moves,
    sample_random_dag,
)
from bnproxy.scoring import ExactScorer, log_bde
from bnproxy.search import SearchError, SearchTrajectory, default_max_steps, greedy_search

from oracles import brute_reaches


class TestDag:
    def test_cycle_rejected_on_mutation(self):
        g = Dag(3, [(0, 1), (1, 2)])
        with pytest.raises(CycleError):
            g.add_edge(2, 0)
        with pytest.raises(IllegalMove):
            g.add_edge(0, 1)
        with pytest.raises(IllegalMove):
            g.remove_edge(2, 1)
        with pytest.raises(ValueError):
            g.add_edge(1, 1)
        with pytest.raises(IndexError):
            g.add_edge(0, 3)

    def test_json_round_trip(self, tmp_path):
        g = Dag(4, [(0, 3), (2, 1), (3, 1)])
        g.save(tmp_path / "g.json")
        assert Dag.load(tmp_path / "g.json") == g
        assert g.to_json() == {"n": 4, "edges": [[0, 3], [2, 1], [3, 1]]}

    def test_copy_is_independent(self):
        g = Dag(3, [(0, 1)])
        h = g.copy()
        h.add_edge(1, 2)
        assert g.edges == [(0, 1)]

    def test_indicator_round_trip(self, rng):
        for _ in range(20):
            n = int(rng.integers(2, 7))
            g = sample_random_dag(n, 0.5, rng)
            bits = edge_indicator(g)
            assert bits.shape == (n * (n - 1),)
            assert bits.sum() == g.n_edges
            assert dag_from_indicator(bits, n) == g

    def test_edge_index_is_lexicographic(self):
        n = 5
        pairs = edge_pairs(n)
        assert pairs == sorted(pairs)
        assert [edge_index(n, u, v) for u, v in pairs] == list(range(n * (n - 1)))


class TestCreatesCycle:
    def test_empty_graph(self):
        g = Dag(4)
        assert not any(creates_cycle(g, (u, v)) for u in range(4) for v in range(4) if u != v)

    def test_two_cycle(self):
        assert creates_cycle(Dag(2, [(0, 1)]), (1, 0))

    def test_chain(self):
        g = Dag(3, [(0, 1), (1, 2)])
        assert creates_cycle(g, (2, 0))
        assert not creates_cycle(g, (0, 2))

    def test_out_of_range(self):
        with pytest.raises(IndexError):
            creates_cycle(Dag(2), (0, 2))

    def test_matches_transitive_closure(self, rng):
        for _ in range(50):
            n = int(rng.integers(2, 8))
            g = sample_random_dag(n, float(rng.uniform()), rng)
            for u, v in itertools.permutations(range(n), 2):
                assert creates_cycle(g, (u, v)) == brute_reaches(g.edges, n, v, u)


class TestEnumerateMoves:
    def test_empty_graph(self):
        moves = enumerate_moves(Dag(5))
        assert len(moves) == 20
        assert all(m.kind == "add" for m in moves)

    def test_complete_dag(self):
        n = 5
        g = Dag(n, [(u, v) for u in range(n) for v in range(u + 1, n)])
        moves = enumerate_moves(g)
        assert len(moves) == n * (n - 1) // 2
        assert all(m.kind == "delete" for m in moves)

    def test_two_cycle_excluded(self):
        moves = enumerate_moves(Dag(2, [(0, 1)]))
        assert moves == [Move("delete", (0, 1))]

    def test_canonical_order_and_legality(self, rng):
        for _ in range(30):
            n = int(rng.integers(2, 7))
            g = sample_random_dag(n, float(rng.uniform()), rng)
            moves = enumerate_moves(g)
            assert [m.edge for m in moves] == sorted(m.edge for m in moves)
            legal = {
                m for u, v in itertools.permutations(range(n), 2)
                for m in (Move("add", (u, v)), Move("delete", (u, v))) if g.is_legal(m)
            }
            assert set(moves) == legal
            for m in moves:
                assert g.after(m).is_acyclic()


class TestSampleRandomDag:
    def test_extremes(self):
        assert sample_random_dag(6, 0.0, 1).n_edges == 0
        assert sample_random_dag(6, 1.0, 1).n_edges == 15

    def test_deterministic(self):
        assert sample_random_dag(8, 0.4, 42) == sample_random_dag(8, 0.4, 42)

    def test_bad_probability(self):
        with pytest.raises(ValueError):
            sample_random_dag(3, 1.5)

    def test_mean_edge_count(self):
        n, draws = 6, 2000
        pairs = n * (n - 1) // 2
        rng = np.random.default_rng(5)
        counts = np.array([sample_random_dag(n, 0.5, rng).n_edges for _ in range(draws)])
        # mean of draws Binomial(pairs, 1/2) variables
        sigma = math.sqrt(pairs * 0.25 / draws)
        assert abs(counts.mean() - n * (n - 1) / 4) <= 3 * sigma


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 9), st.floats(0, 1), st.integers(0, 2**32 - 1))
def test_sampled_graphs_acyclic(n, p, seed):
    g = sample_random_dag(n, p, seed)
    assert g.is_acyclic()
    assert len(g.topological_order()) == n


class Constant:
    def score(self, g):
        return 3.0


class EdgeCount:
    """Rewards edges into node 0 only."""

    tag = "toy"

    def score(self, g):
        return float(len(g.parents(0)))


class Exploding:
    def __init__(self, after):
        self.calls = 0
        self.after = after

    def score(self, g):
        self.calls += 1
        if self.calls > self.after:
            raise RuntimeError("boom")
        return float(g.n_edges)


def correlated_pair(m=1000):
    rng = np.random.default_rng(0)
    x = rng.integers(0, 2, m)
    return Dataset.from_array(np.column_stack([x, x]))


class TestGreedySearch:
    def test_constant_scorer_stops_immediately(self):
        g, traj = greedy_search(Dag(4), Constant())
        assert g == Dag(4)
        assert traj.steps == []
        assert traj.stop_reason == "local optimum"

    def test_zero_max_steps(self):
        g, traj = greedy_search(Dag(3), EdgeCount(), max_steps=0)
        assert g == Dag(3) and traj.steps == []

    def test_toy_scorer(self):
        g, traj = greedy_search(Dag(4), EdgeCount())
        assert g.parents(0) == (1, 2, 3)
        assert traj.driving_scores == [1.0, 2.0, 3.0]
        # ties go to the first move in (u, v) order
        assert [m.edge for m in traj.moves] == [(1, 0), (2, 0), (3, 0)]

    def test_start_graph_untouched(self):
        start = Dag(3)
        greedy_search(start, EdgeCount())
        assert start == Dag(3)

    def test_failure_carries_partial_trajectory(self):
        with pytest.raises(SearchError) as info:
            greedy_search(Dag(3), Exploding(after=10), use_delta=False)
        assert isinstance(info.value.trajectory, SearchTrajectory)
        assert info.value.__cause__.args == ("boom",)

    def test_correlated_pair_gets_one_edge(self):
        d = correlated_pair()
        s = ExactScorer(d)
        # exhaustive table over the three DAGs on two nodes
        table = {tuple(g.edges): s.score(g) for g in (Dag(2), Dag(2, [(0, 1)]), Dag(2, [(1, 0)]))}
        assert table[((0, 1),)] == pytest.approx(table[((1, 0),)], abs=1e-9)
        assert table[((0, 1),)] > table[()]
        g, traj = greedy_search(Dag(2), s)
        assert g.n_edges == 1
        assert len(traj.steps) == 1

    def test_exact_run_monotone_and_acyclic(self, rng):
        values = rng.integers(0, 2, (300, 5))
        values[:, 1] = values[:, 0] ^ (rng.random(300) < 0.1)
        values[:, 3] = values[:, 1] & values[:, 2]
        d = Dataset.from_array(values)
        s = ExactScorer(d)
        g, traj = greedy_search(Dag(5), s)
        scores = [traj.start_score] + traj.driving_scores
        assert all(b > a for a, b in zip(scores, scores[1:]))
        replay = Dag(5)
        for step in traj.steps:
            replay.apply(step.move)
            assert replay.is_acyclic()
            assert step.driving_score == pytest.approx(log_bde(replay, d).total, abs=1e-9)
        assert replay == g

    def test_incremental_equals_full_rescoring(self, rng):
        for seed in range(5):
            r = np.random.default_rng(seed)
            values = r.integers(0, 3, (200, 5))
            values[:, 4] = (values[:, 0] + values[:, 1]) % 3
            d = Dataset.from_array(values)
            g1, t1 = greedy_search(Dag(5), ExactScorer(d), use_delta=True)
            g2, t2 = greedy_search(Dag(5), ExactScorer(d), use_delta=False)
            assert t1.moves == t2.moves
            assert g1 == g2

    def test_trajectory_csv_round_trip(self, tmp_path):
        d = correlated_pair(200)
        s = ExactScorer(d)
        _, traj = greedy_search(Dag(2), s, exact=s.score)
        path = tmp_path / "t.csv"
        traj.to_csv(path)
        header = path.read_text().splitlines()[0]
        assert header == "step,kind,from,to,driving_score,exact_score,elapsed_ms"
        back = SearchTrajectory.read_csv(path)
        assert back.moves == traj.moves
        assert back.driving_scores == traj.driving_scores
        assert [s.exact_score for s in back.steps] == [s.exact_score for s in traj.steps]

    def test_cyclic_start_rejected(self):
        g = Dag(2, [(0, 1)])
        g._children[1].add(0)
        g._parents[0].add(1)
        with pytest.raises(CycleError):
            greedy_search(g, Constant())

    def test_default_max_steps(self):
        assert default_max_steps(15) == 420
