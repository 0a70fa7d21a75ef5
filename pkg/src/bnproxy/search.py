"""Greedy best-improvement hill climbing over single-edge additions/deletions."""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field
from typing import Callable, Protocol

from .graph import (
    CycleError,
    Dag,
    IllegalMove,
    Move,
    creates_cycle,
    default_edge_probability,
    enumerate_moves,
    sample_random_dag,
)

__all__ = [
    "CycleError",
    "Dag",
    "IllegalMove",
    "Move",
    "Scorer",
    "SearchError",
    "SearchStep",
    "SearchTrajectory",
    "creates_cycle",
    "default_edge_probability",
    "default_max_steps",
    "enumerate_moves",
    "greedy_search",
    "sample_random_dag",
]

# deltas closer than this (relative to the score magnitude) count as ties
TIE_RTOL = 1e-12


class Scorer(Protocol):
    def score(self, g: Dag) -> float: ...


@dataclass
class SearchStep:
    step: int
    move: Move
    driving_score: float
    exact_score: float | None
    elapsed_ms: float


@dataclass
class SearchTrajectory:
    scorer: str
    start_score: float
    steps: list[SearchStep] = field(default_factory=list)
    started_at: float = 0.0
    finished_at: float = 0.0
    stop_reason: str = ""

    @property
    def driving_scores(self) -> list[float]:
        return [s.driving_score for s in self.steps]

    @property
    def moves(self) -> list[Move]:
        return [s.move for s in self.steps]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["step", "kind", "from", "to", "driving_score", "exact_score", "elapsed_ms"])
            for s in self.steps:
                w.writerow([
                    s.step,
                    s.move.kind,
                    s.move.edge[0],
                    s.move.edge[1],
                    repr(s.driving_score),
                    "" if s.exact_score is None else repr(s.exact_score),
                    f"{s.elapsed_ms:.3f}",
                ])

    @classmethod
    def read_csv(cls, path, scorer: str = "", start_score: float = float("nan")) -> "SearchTrajectory":
        traj = cls(scorer, start_score)
        with open(path, newline="", encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                traj.steps.append(SearchStep(
                    int(row["step"]),
                    Move(row["kind"], (int(row["from"]), int(row["to"]))),
                    float(row["driving_score"]),
                    float(row["exact_score"]) if row["exact_score"] else None,
                    float(row["elapsed_ms"]),
                ))
        return traj


class SearchError(RuntimeError):
    """Scorer failure during search; carries the trajectory up to the failure."""

    def __init__(self, msg, trajectory: SearchTrajectory, graph: Dag):
        super().__init__(msg)
        self.trajectory = trajectory
        self.graph = graph


def default_max_steps(n: int) -> int:
    return 2 * n * (n - 1)


def greedy_search(
    start: Dag,
    scorer: Scorer,
    max_steps: int | None = None,
    exact: Callable[[Dag], float] | None = None,
    use_delta: bool = True,
) -> tuple[Dag, SearchTrajectory]:
    """Apply the best strictly-improving legal move until none remains.

    Moves are scored with ``scorer.delta(g, move)`` when available (and
    ``use_delta``), else by rescoring the neighbour. Among moves whose
    improvement ties the best within rounding, the first in canonical
    (u, v) order wins. ``exact``, if given, is evaluated after every move and
    recorded alongside the driving score.
    """
    g = start.copy()
    if not g.is_acyclic():
        raise CycleError("start graph has a cycle")
    if max_steps is None:
        max_steps = default_max_steps(g.n)
    if max_steps < 0:
        raise ValueError("max_steps must be >= 0")
    delta = getattr(scorer, "delta", None) if use_delta else None
    tag = getattr(scorer, "tag", type(scorer).__name__)

    t0 = time.perf_counter()
    traj = SearchTrajectory(tag, float("nan"), started_at=time.time())
    try:
        current = scorer.score(g)
    except Exception as exc:
        raise SearchError(f"scorer failed on start graph: {exc}", traj, g) from exc
    traj.start_score = current

    while len(traj.steps) < max_steps:
        try:
            best_move, best_gain = _best_move(g, current, scorer, delta)
        except Exception as exc:
            traj.finished_at = time.time()
            traj.stop_reason = "error"
            raise SearchError(f"scorer failed at step {len(traj.steps) + 1}: {exc}", traj, g) from exc
        if best_move is None:
            traj.stop_reason = "local optimum"
            break
        g.apply(best_move)
        try:
            new = scorer.score(g)
            ex = exact(g) if exact is not None else None
        except Exception as exc:
            traj.finished_at = time.time()
            traj.stop_reason = "error"
            raise SearchError(f"scorer failed after {best_move}: {exc}", traj, g) from exc
        current = new
        traj.steps.append(SearchStep(
            len(traj.steps) + 1, best_move, new, ex, 1e3 * (time.perf_counter() - t0),
        ))
    else:
        traj.stop_reason = "max steps"
    traj.finished_at = time.time()
    return g, traj


def _best_move(g: Dag, current: float, scorer, delta):
    tol = TIE_RTOL * max(1.0, abs(current))
    best_move, best_gain = None, tol
    for move in enumerate_moves(g):
        gain = delta(g, move) if delta is not None else scorer.score(g.after(move)) - current
        # strict improvement beyond rounding, earliest move wins ties
        if gain > best_gain + (tol if best_move is not None else 0.0):
            best_move, best_gain = move, gain
    return best_move, best_gain
