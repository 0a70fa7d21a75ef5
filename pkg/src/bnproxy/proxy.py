"""Simple-kriging score proxy over edge-indicator vectors.

The kernel between two graphs is the weighted count of edges they share,
``k(a, b) = sum_e w_e a_e b_e``. Predictions are ``K(q, g) alpha + y_mean``
with ``alpha = (K(g, g) + jitter I)^-1 (y - y_mean)``.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import LinAlgError, cho_solve, cholesky

from .graph import Dag, Move, edge_index, edge_indicator

log = logging.getLogger(__name__)

LOG_2PI = math.log(2.0 * math.pi)
JITTER_RETRIES = 3


class ProxyFitError(LinAlgError):
    """Gram matrix could not be factorized even after jitter escalation."""


def _as_indicators(graphs) -> np.ndarray:
    rows = [edge_indicator(g) if isinstance(g, Dag) else np.asarray(g, dtype=bool) for g in graphs]
    if not rows:
        raise ValueError("need at least one training graph")
    width = {r.shape for r in rows}
    if len(width) != 1:
        raise ValueError(f"edge indicators of differing lengths: {sorted(width)}")
    return np.vstack(rows).astype(float)


def kernel_eval(a, b, w) -> float:
    a = np.asarray(a, dtype=bool)
    b = np.asarray(b, dtype=bool)
    w = np.asarray(w, dtype=float)
    if not (a.shape == b.shape == w.shape):
        raise ValueError(f"length mismatch: {a.shape}, {b.shape}, {w.shape}")
    return float(w[a & b].sum())


def gram(X: np.ndarray, w: np.ndarray, Z: np.ndarray | None = None) -> np.ndarray:
    """K[i, j] = k(X_i, Z_j); ``Z`` defaults to ``X``."""
    Z = X if Z is None else Z
    return (X * w) @ Z.T


def default_jitter(K: np.ndarray) -> float:
    mean_diag = float(np.trace(K)) / K.shape[0]
    return 1e-8 * mean_diag if mean_diag > 0 else 1e-8


def _factorize(K: np.ndarray, jitter: float):
    """Lower Cholesky factor of K + jitter I, escalating jitter x10 on failure."""
    base = jitter
    for attempt in range(JITTER_RETRIES + 1):
        try:
            A = K + jitter * np.eye(K.shape[0])
            L = cholesky(A, lower=True, check_finite=True)
            # a pivot at rounding level means the factor is numerically singular
            scale = max(float(np.max(np.diag(A))), np.finfo(float).tiny)
            if np.min(np.diag(L)) ** 2 <= K.shape[0] * np.finfo(float).eps * scale:
                raise LinAlgError("numerically singular pivot")
            if attempt:
                log.info("gram factorization needed jitter %.3g (requested %.3g)", jitter, base)
            return L, jitter
        except (LinAlgError, ValueError):
            jitter = jitter * 10.0 if jitter > 0 else 1e-12
    eig = np.linalg.eigvalsh(K) if np.all(np.isfinite(K)) else np.array([np.nan])
    raise ProxyFitError(
        f"gram matrix of size {K.shape[0]} not positive definite with jitter {jitter / 10:.3g}; "
        f"eigenvalue range [{eig.min():.3g}, {eig.max():.3g}]"
    )


@dataclass
class GpModel:
    train_g: np.ndarray  # (n_s, n(n-1)) float 0/1
    y: np.ndarray  # centered training scores
    y_mean: float
    weights: np.ndarray
    jitter: float
    gram_factor: np.ndarray = field(repr=False)
    alpha: np.ndarray = field(repr=False)

    @property
    def n_s(self) -> int:
        return self.train_g.shape[0]

    @property
    def n(self) -> int:
        e = self.train_g.shape[1]
        return int(round((1 + math.sqrt(1 + 4 * e)) / 2))

    def edge_contributions(self) -> np.ndarray:
        """Per-edge additive effect on the prediction.

        The kernel is a weighted dot product, so the predictor is linear in
        the query's edge indicators: ``y_mean + q @ edge_contributions()``.
        """
        return self.weights * (self.train_g.T @ self.alpha)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "n_s": self.n_s,
            "graphs": ["".join("1" if b else "0" for b in row > 0.5) for row in self.train_g],
            "y": self.y.tolist(),
            "y_mean": self.y_mean,
            "weights": self.weights.tolist(),
            "jitter": self.jitter,
        }

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh, indent=1)

    @classmethod
    def from_json(cls, doc: dict) -> "GpModel":
        n = int(doc["n"])
        X = np.array([[c == "1" for c in s] for s in doc["graphs"]], dtype=float)
        if X.shape != (int(doc["n_s"]), n * (n - 1)):
            raise ValueError(f"model graphs have shape {X.shape}, expected ({doc['n_s']}, {n * (n - 1)})")
        y = np.asarray(doc["y"], dtype=float)
        w = np.asarray(doc["weights"], dtype=float)
        return _assemble(X, y, float(doc["y_mean"]), w, float(doc["jitter"]))

    @classmethod
    def load(cls, path) -> "GpModel":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


def _assemble(X, y_centered, y_mean, w, jitter) -> GpModel:
    K = gram(X, w)
    L, jitter = _factorize(K, jitter)
    alpha = cho_solve((L, True), y_centered)
    return GpModel(X, y_centered, y_mean, w, jitter, L, alpha)


def _prepare(graphs, scores, weights, jitter, center):
    X = _as_indicators(graphs)
    y = np.asarray(scores, dtype=float)
    if y.shape != (X.shape[0],):
        raise ValueError(f"{y.size} scores for {X.shape[0]} training graphs")
    w = np.ones(X.shape[1]) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != (X.shape[1],):
        raise ValueError(f"{w.size} weights for {X.shape[1]} possible edges")
    if np.any(w < 0):
        raise ValueError("kernel weights must be nonnegative")
    y_mean = float(y.mean()) if center else 0.0
    K = gram(X, w)
    if jitter is None:
        jitter = default_jitter(K)
    elif jitter < 0:
        raise ValueError("jitter must be nonnegative")
    return X, y - y_mean, y_mean, w, K, float(jitter)


def fit(graphs: Sequence, scores, weights=None, jitter: float | None = None, center: bool = True) -> GpModel:
    """Factor the training Gram matrix once and precompute ``alpha``.

    ``graphs`` may be Dags or edge-indicator vectors. ``jitter=None`` uses
    ``1e-8`` times the mean Gram diagonal.
    """
    X, yc, y_mean, w, K, jitter = _prepare(graphs, scores, weights, jitter, center)
    L, jitter = _factorize(K, jitter)
    alpha = cho_solve((L, True), yc)
    return GpModel(X, yc, y_mean, w, jitter, L, alpha)


def predict(model: GpModel, q):
    """Kriging mean at one graph/indicator (float) or a batch (array)."""
    if isinstance(q, Dag):
        q = edge_indicator(q)
    Q = np.asarray(q, dtype=float)
    single = Q.ndim == 1
    Q = np.atleast_2d(Q)
    if Q.shape[1] != model.train_g.shape[1]:
        raise ValueError(f"query length {Q.shape[1]} != {model.train_g.shape[1]}")
    out = gram(Q, model.weights, model.train_g) @ model.alpha + model.y_mean
    return float(out[0]) if single else out


def _lml_parts(K, yc, jitter):
    L, _ = _factorize(K, jitter)
    alpha = cho_solve((L, True), yc)
    lml = -0.5 * yc @ alpha - np.log(np.diag(L)).sum() - 0.5 * len(yc) * LOG_2PI
    return float(lml), L, alpha


def log_marginal_likelihood(graphs, scores, weights=None, jitter: float | None = None, center: bool = True) -> float:
    """GP evidence of the (centered) scores under the edge kernel."""
    _, yc, _, _, K, jitter = _prepare(graphs, scores, weights, jitter, center)
    return _lml_parts(K, yc, jitter)[0]


def _lml_and_grad(X, yc, w, jitter):
    K = gram(X, w)
    lml, L, alpha = _lml_parts(K, yc, jitter)
    Kinv = cho_solve((L, True), np.eye(len(yc)))
    A = np.outer(alpha, alpha) - Kinv
    # dK/dlog(w_e) = w_e x_e x_e^T, so the partial is 0.5 w_e x_e^T A x_e
    quad = np.einsum("ie,ij,je->e", X, A, X, optimize=True)
    return lml, 0.5 * w * quad


def lml_gradient(graphs, scores, weights=None, jitter: float | None = None, center: bool = True) -> np.ndarray:
    """Gradient of the log marginal likelihood w.r.t. each log-weight."""
    X, yc, _, w, _, jitter = _prepare(graphs, scores, weights, jitter, center)
    return _lml_and_grad(X, yc, w, jitter)[1]


@dataclass
class TuneResult:
    weights: np.ndarray
    lml: float
    history: list[float]
    iterations: int
    converged: bool
    warning: str | None = None


def tune_weights(
    graphs,
    scores,
    init=None,
    jitter: float | None = None,
    max_iters: int = 200,
    tol: float = 1e-6,
    step: float = 0.1,
    center: bool = True,
    max_halvings: int = 40,
) -> TuneResult:
    """Gradient ascent on log-weights with backtracking step halving.

    Each proposal moves the log-weights along the gradient scaled so that no
    single log-weight changes by more than ``step``. A proposal that lowers
    the evidence or makes it non-finite is rejected and the step halved.
    ``history`` holds the evidence of every accepted iterate.
    """
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    if not tol > 0:
        raise ValueError("tol must be positive")
    X, yc, _, w0, K0, jitter = _prepare(graphs, scores, init, jitter, center)
    if np.any(w0 <= 0):
        raise ValueError("initial weights must be strictly positive for log-parametrization")
    # the jitter is frozen at its initial value so every evaluation sees the same objective
    theta = np.log(w0)
    lml, grad = _lml_and_grad(X, yc, w0, jitter)
    history = [lml]
    warning = None
    converged = False
    iterations = 0
    for iterations in range(1, max_iters + 1):
        gmax = float(np.max(np.abs(grad))) if grad.size else 0.0
        if gmax == 0.0 or not np.isfinite(gmax):
            converged = gmax == 0.0
            if not converged:
                warning = "non-finite gradient"
            break
        direction = grad / gmax
        accepted = False
        for _ in range(max_halvings):
            cand = theta + step * direction
            try:
                new_lml, new_grad = _lml_and_grad(X, yc, np.exp(cand), jitter)
            except (LinAlgError, ValueError, FloatingPointError):
                new_lml = -math.inf
            if np.isfinite(new_lml) and new_lml >= lml:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            converged = True
            if not np.isfinite(new_lml):
                warning = "evidence not finite along the ascent direction"
            break
        gain = new_lml - lml
        theta, lml, grad = cand, new_lml, new_grad
        history.append(lml)
        if abs(gain) < tol:
            converged = True
            break
    if warning:
        log.warning("tune_weights: %s; returning best weights found", warning)
    return TuneResult(np.exp(theta), lml, history, iterations, converged, warning)


class ProxyScorer:
    """Greedy-search scorer backed by a fitted GpModel.

    Uses the linear form of the predictor so a single-edge delta is one
    table lookup; ``score`` agrees with ``predict``.
    """

    tag = "proxy"

    def __init__(self, model: GpModel):
        self.model = model
        self.n = model.n
        self._contrib = model.edge_contributions()

    def score(self, g: Dag) -> float:
        return self.model.y_mean + float(self._contrib[edge_indicator(g)].sum())

    def delta(self, g: Dag, move: Move) -> float:
        c = self._contrib[edge_index(self.n, *move.edge)]
        return float(c) if move.kind == "add" else -float(c)
