"""Exact-vs-proxy benchmark protocol: timed repeats, n_s sweeps, gradient agreement."""

from __future__ import annotations

import csv
import json
import logging
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .counts import CountCache
from .dataset import Dataset, load_arity_sidecar, load_csv
from .graph import Dag, enumerate_moves, sample_random_dag, default_edge_probability
from .proxy import ProxyScorer, fit, tune_weights
from .scoring import BdeParams, ExactScorer
from .search import greedy_search

log = logging.getLogger(__name__)

MODES = ("exact", "proxy")
# keys left out when comparing results for run-to-run determinism
TIMING_KEYS = ("wall_time", "stage_times", "mean_time", "std_time", "created")


@dataclass
class BenchConfig:
    data: str | None = None
    arity: str | None = None
    ess: float = 1.0
    ns: int = 250
    p: float | None = None
    seed: int = 0
    mode: str = "proxy"
    max_steps: int | None = None
    repeats: int = 5
    out: str | None = None
    record_exact: bool = False
    tune: bool = True
    tune_iters: int = 200
    synthetic: dict | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")
        if self.mode == "proxy" and self.ns < 1:
            raise ValueError("proxy mode needs ns >= 1")
        if self.p is not None and not 0 <= self.p <= 1:
            raise ValueError("p must lie in [0, 1]")
        if not self.ess > 0:
            raise ValueError("ess must be positive")

    @classmethod
    def from_json(cls, doc: dict) -> "BenchConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**doc)

    def load_data(self) -> Dataset:
        if self.data is not None:
            arity = load_arity_sidecar(self.arity) if self.arity else None
            return load_csv(self.data, arity)
        if self.synthetic is not None:
            from .synth import random_network

            s = dict(self.synthetic)
            m = int(s.pop("m"))
            data_seed = s.pop("data_seed", self.seed)
            net = random_network(seed=data_seed, **s)
            return net.sample(m, seed=data_seed + 1)
        raise ValueError("config names neither a data file nor a synthetic generator")


@dataclass
class RepeatResult:
    repeat: int
    seed: int
    final_score: float | None = None
    wall_time: float | None = None
    n_steps: int | None = None
    edges: list[list[int]] = field(default_factory=list)
    trajectory: str | None = None
    stage_times: dict = field(default_factory=dict)
    tuned_lml: float | None = None
    error: str | None = None


@dataclass
class BenchResult:
    mode: str
    config: dict
    repeats: list[RepeatResult]
    mean_score: float
    std_score: float
    mean_time: float
    std_time: float

    def to_json(self) -> dict:
        return asdict(self)

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh, indent=2, sort_keys=True)


def _train_proxy(d: Dataset, scorer: ExactScorer, cfg: BenchConfig, rng, stages: dict):
    p = default_edge_probability(d.n) if cfg.p is None else cfg.p
    t = time.perf_counter()
    graphs = [sample_random_dag(d.n, p, rng) for _ in range(cfg.ns)]
    stages["sample"] = time.perf_counter() - t

    t = time.perf_counter()
    y = np.array([scorer.score(g) for g in graphs])
    stages["score"] = time.perf_counter() - t

    t = time.perf_counter()
    tuned = None
    weights = None
    if cfg.tune:
        tuned = tune_weights(graphs, y, max_iters=cfg.tune_iters)
        weights = tuned.weights
    stages["tune"] = time.perf_counter() - t

    t = time.perf_counter()
    model = fit(graphs, y, weights)
    stages["fit"] = time.perf_counter() - t
    return model, tuned


def _run_repeat(d: Dataset, cfg: BenchConfig, r: int, outdir: Path | None) -> RepeatResult:
    seed = cfg.seed + r
    res = RepeatResult(repeat=r, seed=seed)
    rng = np.random.default_rng(seed)
    stages: dict = {}
    t0 = time.perf_counter()
    exact = ExactScorer(d, BdeParams(cfg.ess), CountCache(d))
    if cfg.mode == "exact":
        driver = exact
        record = None
    else:
        model, tuned = _train_proxy(d, exact, cfg, rng, stages)
        res.tuned_lml = None if tuned is None else tuned.lml
        driver = ProxyScorer(model)
        record = exact.score if cfg.record_exact else None

    t = time.perf_counter()
    g, traj = greedy_search(Dag(d.n), driver, cfg.max_steps, exact=record)
    stages["search"] = time.perf_counter() - t

    t = time.perf_counter()
    # reported scores always come from the exact scorer
    res.final_score = exact.score(g)
    stages["rescore"] = time.perf_counter() - t
    res.wall_time = time.perf_counter() - t0
    res.stage_times = stages
    res.n_steps = len(traj.steps)
    res.edges = [list(e) for e in g.edges]
    if outdir is not None:
        name = f"trajectory_{cfg.mode}_r{r}.csv"
        traj.to_csv(outdir / name)
        res.trajectory = name
    return res


def _aggregate(values):
    vals = [v for v in values if v is not None]
    if not vals:
        return math.nan, math.nan
    return float(np.mean(vals)), float(np.std(vals))


def run_benchmark(cfg: BenchConfig, data: Dataset | None = None) -> BenchResult:
    """Run ``cfg.repeats`` timed searches; seeds are ``cfg.seed + repeat``.

    Timing starts after the dataset is loaded and covers training-set
    sampling, exact scoring, weight tuning, fitting, search and the final
    exact rescore.
    """
    d = data if data is not None else cfg.load_data()
    outdir = Path(cfg.out) if cfg.out else None
    if outdir is not None:
        outdir.mkdir(parents=True, exist_ok=True)
    repeats = []
    for r in range(cfg.repeats):
        try:
            repeats.append(_run_repeat(d, cfg, r, outdir))
        except Exception as exc:  # recorded, the remaining repeats still run
            log.exception("repeat %d failed", r)
            repeats.append(RepeatResult(repeat=r, seed=cfg.seed + r, error=f"{type(exc).__name__}: {exc}"))
    mean_score, std_score = _aggregate([r.final_score for r in repeats])
    mean_time, std_time = _aggregate([r.wall_time for r in repeats])
    result = BenchResult(cfg.mode, asdict(cfg), repeats, mean_score, std_score, mean_time, std_time)
    if outdir is not None:
        result.write(outdir / f"result_{cfg.mode}.json")
    return result


def strip_timing(doc):
    """Copy of a result document without wall-clock fields."""
    if isinstance(doc, dict):
        return {k: strip_timing(v) for k, v in doc.items() if k not in TIMING_KEYS}
    if isinstance(doc, list):
        return [strip_timing(v) for v in doc]
    return doc


def ns_sweep(cfg: BenchConfig, ns_values, data: Dataset | None = None) -> list[dict]:
    """One proxy benchmark per n_s; rows are (n_s, mean/std time, mean/std score)."""
    ns_values = list(ns_values)
    if not ns_values:
        raise ValueError("ns_values must be nonempty")
    d = data if data is not None else cfg.load_data()
    rows = []
    for ns in ns_values:
        sub = BenchConfig(**{**asdict(cfg), "ns": int(ns), "mode": "proxy",
                             "out": str(Path(cfg.out) / f"ns_{ns}") if cfg.out else None})
        res = run_benchmark(sub, d)
        rows.append({
            "ns": int(ns),
            "mean_time": res.mean_time,
            "std_time": res.std_time,
            "mean_score": res.mean_score,
            "std_score": res.std_score,
            "failures": sum(r.error is not None for r in res.repeats),
        })
    if cfg.out:
        write_rows(rows, Path(cfg.out) / "ns_sweep.csv")
    return rows


def write_rows(rows: list[dict], path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)


@dataclass
class Agreement:
    rate: float
    agree: int
    compared: int
    skipped_zero: int


def gradient_agreement(exact, proxy, probes) -> Agreement:
    """Fraction of legal moves on which proxy and exact deltas share a sign.

    Moves with an exact delta of zero are skipped: they carry no direction.
    """
    agree = compared = skipped = 0
    for g in probes:
        for move in enumerate_moves(g):
            de = exact.delta(g, move)
            if de == 0:
                skipped += 1
                continue
            dp = proxy.delta(g, move)
            compared += 1
            agree += int(np.sign(dp) == np.sign(de))
    rate = agree / compared if compared else math.nan
    return Agreement(rate, agree, compared, skipped)


def gradient_agreement_for(cfg: BenchConfig, data: Dataset | None = None, n_probes: int = 5) -> Agreement:
    """Train a proxy as in one proxy repeat and probe it on random DAGs."""
    d = data if data is not None else cfg.load_data()
    rng = np.random.default_rng(cfg.seed)
    exact = ExactScorer(d, BdeParams(cfg.ess))
    model, _ = _train_proxy(d, exact, cfg, rng, {})
    p = default_edge_probability(d.n) if cfg.p is None else cfg.p
    probes = [Dag(d.n)] + [sample_random_dag(d.n, p, rng) for _ in range(n_probes - 1)]
    return gradient_agreement(exact, ProxyScorer(model), probes)
