"""Command-line entry point: ``bnproxy <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np
from scipy.linalg import LinAlgError

from .bench import BenchConfig, MODES, gradient_agreement_for, ns_sweep, run_benchmark
from .counts import CountCache
from .dataset import DatasetError, load_arity_sidecar, load_csv
from .graph import Dag, default_edge_probability, sample_random_dag
from .proxy import GpModel, ProxyScorer, fit, tune_weights
from .scoring import BdeParams, ExactScorer, log_bic
from .search import greedy_search
from .smoothlab import lipschitz_sweep


def _load_data(args):
    arity = load_arity_sidecar(args.arity) if args.arity else None
    return load_csv(args.data, arity)


def _dump(doc, path=None):
    text = json.dumps(doc, indent=2, sort_keys=True)
    if path:
        Path(path).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def _int_list(text):
    try:
        return [int(float(x)) for x in text.replace(" ", "").split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None


def cmd_score(args):
    d = _load_data(args)
    g = Dag.load(args.graph)
    if g.n != d.n:
        raise ValueError(f"graph has {g.n} nodes, data has {d.n} variables")
    if args.bic:
        doc = {"score": log_bic(g, d), "kind": "bic"}
    else:
        ledger = ExactScorer(d, BdeParams(args.ess)).ledger(g)
        doc = {
            "score": ledger.total,
            "kind": "bde",
            "ess": args.ess,
            "families": [
                {"child": f.child, "parents": list(f.parents), "score": s}
                for f, s in zip(ledger.families, ledger.scores)
            ],
        }
    _dump(doc)


def _train(d, args, rng):
    p = default_edge_probability(d.n) if args.p is None else args.p
    exact = ExactScorer(d, BdeParams(args.ess))
    graphs = [sample_random_dag(d.n, p, rng) for _ in range(args.ns)]
    y = np.array([exact.score(g) for g in graphs])
    weights = None
    if not args.no_tune:
        tuned = tune_weights(graphs, y, max_iters=args.tune_iters)
        weights = tuned.weights
        logging.info("tuned weights: lml %.6g after %d iterations", tuned.lml, tuned.iterations)
    return fit(graphs, y, weights), exact


def cmd_train_proxy(args):
    d = _load_data(args)
    model, _ = _train(d, args, np.random.default_rng(args.seed))
    model.save(args.out)
    print(f"wrote {args.out} (n={model.n}, n_s={model.n_s})")


def cmd_search(args):
    d = _load_data(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    exact = ExactScorer(d, BdeParams(args.ess), CountCache(d))
    if args.mode == "exact":
        driver, record = exact, None
    else:
        if args.model:
            model = GpModel.load(args.model)
            if model.n != d.n:
                raise ValueError(f"model is for n={model.n}, data has n={d.n}")
        else:
            model, _ = _train(d, args, np.random.default_rng(args.seed))
        driver = ProxyScorer(model)
        record = exact.score if args.record_exact else None
    start = Dag.load(args.start) if args.start else Dag(d.n)
    g, traj = greedy_search(start, driver, args.max_steps, exact=record)
    g.save(out / "graph.json")
    traj.to_csv(out / "trajectory.csv")
    doc = {
        "mode": args.mode,
        "seed": args.seed,
        "steps": len(traj.steps),
        "stop_reason": traj.stop_reason,
        "driving_score": traj.steps[-1].driving_score if traj.steps else traj.start_score,
        "exact_score": exact.score(g),
        "graph": g.to_json(),
    }
    _dump(doc, out / "result.json")
    print(f"{args.mode} search: {len(traj.steps)} moves, exact score {doc['exact_score']:.6f}")


def cmd_smooth(args):
    res = lipschitz_sweep(args.pattern, args.lam, args.ngrid, args.parent_count)
    if args.out:
        res.write(args.out)
    _dump(res.summary())


def cmd_bench(args):
    doc = json.loads(Path(args.config).read_text(encoding="utf-8"))
    modes = doc.pop("modes", None) or ([doc.pop("mode")] if "mode" in doc else ["exact", "proxy"])
    if modes == ["both"]:
        modes = list(MODES)
    if args.out:
        doc["out"] = args.out
    base = BenchConfig.from_json(doc)
    d = base.load_data()
    summary = {}
    for mode in modes:
        cfg = BenchConfig(**{**asdict(base), "mode": mode})
        res = run_benchmark(cfg, d)
        summary[mode] = {
            "mean_score": res.mean_score,
            "std_score": res.std_score,
            "mean_time": res.mean_time,
            "std_time": res.std_time,
            "failures": sum(r.error is not None for r in res.repeats),
        }
    if args.ns_sweep:
        summary["ns_sweep"] = ns_sweep(base, args.ns_sweep, d)
    if args.agreement:
        agr = gradient_agreement_for(base, d, args.agreement)
        summary["gradient_agreement"] = asdict(agr)
    if base.out:
        _dump(summary, Path(base.out) / "summary.json")
    _dump(summary)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bnproxy", description="BDe structure learning with a kriging proxy")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def data_args(p):
        p.add_argument("--data", required=True, help="CSV with header row and integer codes")
        p.add_argument("--arity", help="JSON sidecar mapping variable name -> arity")
        p.add_argument("--ess", type=float, default=1.0, help="BDeu equivalent sample size")

    def train_args(p):
        p.add_argument("--ns", type=int, default=250, help="training graphs for the proxy")
        p.add_argument("--p", type=float, default=None, help="edge probability of sampled DAGs")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--no-tune", action="store_true", help="keep unit kernel weights")
        p.add_argument("--tune-iters", type=int, default=200)

    p = sub.add_parser("score", help="exact score of a graph")
    data_args(p)
    p.add_argument("--graph", required=True, help='JSON {"n": .., "edges": [[u, v], ..]}')
    p.add_argument("--bic", action="store_true")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("train-proxy", help="sample, score and fit a proxy model")
    data_args(p)
    train_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train_proxy)

    p = sub.add_parser("search", help="greedy search under the exact or proxy scorer")
    data_args(p)
    train_args(p)
    p.add_argument("--mode", choices=MODES, default="exact")
    p.add_argument("--model", help="proxy model JSON (trained on the fly if omitted)")
    p.add_argument("--start", help="start graph JSON (default: empty)")
    p.add_argument("--max-steps", type=int, default=None)
    p.add_argument("--record-exact", action="store_true", help="log the exact score after every proxy move")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("smooth", help="single-edge score-jump sweep over sample sizes")
    p.add_argument("--pattern", choices=("uniform", "correspondence"), required=True)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--ngrid", type=_int_list, default=[2**k for k in range(6, 17)])
    p.add_argument("--parent-count", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_smooth)

    p = sub.add_parser("bench", help="timed exact-vs-proxy benchmark from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.add_argument("--ns-sweep", type=_int_list, default=None, help="also sweep these n_s values")
    p.add_argument("--agreement", type=int, default=0, metavar="PROBES",
                   help="also report proxy/exact delta sign agreement over this many probe graphs")
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (DatasetError, ValueError, OSError, KeyError, LinAlgError, OverflowError) as exc:
        print(f"bnproxy {args.command}: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
