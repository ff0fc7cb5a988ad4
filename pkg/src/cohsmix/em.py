"""Variational EM: fixed-point E-step, closed-form M-step, fit drivers.

The E-step iterates a damped Jacobi fixed-point update of the vertex
responsibilities in the log domain; the M-step maximises the lower bound in
closed form. ``fit`` alternates the two until the bound stalls, and
``fit_multi_restart`` keeps the best of several independently initialised
runs. Ablation modes drop the edge or feature terms from both steps.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.special import logsumexp, xlogy

from .model import (
    PI_EPS,
    SIGMA2_FLOOR,
    FeatureMatrix,
    Graph,
    ModelParams,
    check_responsibilities,
    edge_log_likelihood,
    feature_log_likelihood,
    one_hot,
    partition_from_responsibilities,
    proportion_log_likelihood,
    responsibility_entropy,
    squared_distances,
)

MODES = ("joint", "graph-only", "features-only")
INIT_STRATEGIES = ("random-dirichlet", "feature-kmeans", "graph-degree-quantile")

EMPTY_CLASS_MASS = 1e-10
_RESCUE_ATTEMPTS = 3


class EmptyClassError(RuntimeError):
    """Raised when one or more classes lose all responsibility mass."""

    def __init__(self, empty_classes):
        self.empty_classes = list(empty_classes)
        super().__init__(f"classes {self.empty_classes} have no mass")


@dataclass(frozen=True)
class EMConfig:
    """Knobs of the EM driver; defaults follow the study protocol."""

    max_em_iters: int = 100
    max_fixedpoint_sweeps: int = 50
    fixedpoint_tol: float = 1e-4
    bound_rel_tol: float = 1e-6
    damping: float = 0.5
    n_restarts: int = 10
    rng_seed: int | None = None
    init_strategy: str = "random-dirichlet"

    def __post_init__(self):
        if self.max_em_iters < 1 or self.max_fixedpoint_sweeps < 1:
            raise ValueError("iteration caps must be at least 1")
        if self.fixedpoint_tol <= 0 or self.bound_rel_tol <= 0:
            raise ValueError("tolerances must be positive")
        if not 0.0 <= self.damping < 1.0:
            raise ValueError("damping must lie in [0, 1)")
        if self.n_restarts < 1:
            raise ValueError("n_restarts must be at least 1")
        if self.init_strategy not in INIT_STRATEGIES:
            raise ValueError(f"unknown init strategy {self.init_strategy!r}")


@dataclass
class FitResult:
    """Converged parameters and responsibilities of one EM run."""

    params: ModelParams
    responsibilities: np.ndarray
    partition: np.ndarray
    bound_trace: list[float]
    converged: bool
    mode: str = "joint"
    icl: float | None = None

    @property
    def final_bound(self) -> float:
        return self.bound_trace[-1]


def _mode_flags(mode: str):
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    return mode != "features-only", mode != "graph-only"


def mode_lower_bound(graph: Graph, features: FeatureMatrix, resp,
                     params: ModelParams, mode: str = "joint") -> float:
    """Lower bound with the edge or feature term dropped per ablation mode."""
    use_edges, use_features = _mode_flags(mode)
    total = proportion_log_likelihood(resp, params.alpha)
    if use_edges:
        total += edge_log_likelihood(graph.adjacency, resp, params.pi)
    if use_features:
        total += feature_log_likelihood(features, resp, params.mu, params.sigma2)
    return total + responsibility_entropy(resp)


# ---------------------------------------------------------------------------
# Initialisation


def init_responsibilities(graph: Graph, features: FeatureMatrix, n_classes: int,
                          strategy: str = "random-dirichlet",
                          rng: np.random.Generator | None = None) -> np.ndarray:
    """Build a row-stochastic starting point.

    ``random-dirichlet`` draws each row from a flat Dirichlet;
    ``feature-kmeans`` one-hot encodes a short k-means run on the feature
    rows, falling back to the adjacency rows (each vertex's connectivity
    profile) when there are no feature columns; ``graph-degree-quantile``
    bins vertices into degree quantiles. The two hard strategies are
    smoothed towards uniform with weight 0.1, so every entry is at least
    0.1 / n_classes.
    """
    if n_classes < 1:
        raise ValueError("n_classes must be at least 1")
    if strategy not in INIT_STRATEGIES:
        raise ValueError(f"unknown init strategy {strategy!r}")
    rng = np.random.default_rng(rng)
    n = graph.n
    if n_classes == 1:
        return np.ones((n, 1))
    if strategy == "random-dirichlet":
        return rng.dirichlet(np.ones(n_classes), size=n)
    if strategy == "feature-kmeans":
        points = features.values if features.p else graph.adjacency
        labels = _kmeans_labels(points, n_classes, rng)
    else:
        labels = _degree_quantile_labels(graph, n_classes)
    return 0.9 * one_hot(labels, n_classes) + 0.1 / n_classes


def _kmeans_labels(points: np.ndarray, k: int, rng: np.random.Generator,
                   n_iters: int = 20) -> np.ndarray:
    n = points.shape[0]
    if points.shape[1] == 0:
        # Nothing to cluster; a balanced random hard partition at least
        # breaks label symmetry.
        return rng.permutation(np.arange(n, dtype=np.int64) % k)
    idx = rng.choice(n, size=k, replace=n < k)
    centers = points[idx].copy()
    labels = np.zeros(n, dtype=np.int64)
    for _ in range(n_iters):
        labels = np.argmin(squared_distances(points, centers), axis=1)
        for q in range(k):
            members = labels == q
            if members.any():
                centers[q] = points[members].mean(axis=0)
    return labels


def _degree_quantile_labels(graph: Graph, k: int) -> np.ndarray:
    n = graph.n
    order = np.argsort(graph.adjacency.sum(axis=1), kind="stable")
    labels = np.zeros(n, dtype=np.int64)
    labels[order] = np.arange(n) * k // max(n, 1)
    return labels


# ---------------------------------------------------------------------------
# E-step


def e_step(graph: Graph, features: FeatureMatrix, params: ModelParams,
           resp: np.ndarray, cfg: EMConfig | None = None,
           mode: str = "joint") -> np.ndarray:
    """Damped Jacobi iteration of the responsibility fixed point.

    Every sweep recomputes all rows from the previous sweep's values, then
    blends with the old values using ``cfg.damping``. Iteration stops once
    the sup-norm residual of the undamped update drops below
    ``cfg.fixedpoint_tol`` (so the damped per-sweep change is below it too)
    or after ``cfg.max_fixedpoint_sweeps`` sweeps. The returned matrix never
    lowers the bound relative to the start: if the final sweep does, the
    best iterate seen (start included) is returned instead.
    """
    cfg = cfg or EMConfig()
    use_edges, use_features = _mode_flags(mode)
    resp = check_responsibilities(resp, graph.n, params.n_classes)
    n, n_classes = resp.shape
    if n_classes == 1:
        return np.ones((n, 1))

    adjacency = graph.adjacency
    with np.errstate(divide="ignore"):
        log_alpha = np.log(params.alpha)
        log_pi = np.log(params.pi)
        log_not = np.log1p(-params.pi)

    if use_features and features.p:
        d2 = squared_distances(features.values, params.mu)
        gauss = -d2 / (2.0 * params.sigma2)
        gauss_const = -0.5 * features.p * np.log(2.0 * np.pi * params.sigma2) * n
    else:
        d2 = None
        gauss = 0.0
        gauss_const = 0.0

    def bound_at(current, edges_on=None):
        # Cheap evaluation reusing the sweep's heavy matmul when available.
        col = current.sum(axis=0)
        total = float(xlogy(col, params.alpha).sum())
        if use_edges:
            if edges_on is None:
                edges_on = adjacency @ current
            on = current.T @ edges_on
            off = np.outer(col, col) - current.T @ current - on
            total += 0.5 * float(xlogy(on, params.pi).sum()
                                 + xlogy(off, 1.0 - params.pi).sum())
        if d2 is not None:
            total += gauss_const - float((current * d2).sum()) / (2.0 * params.sigma2)
        return total + responsibility_entropy(current)

    def sweep(current):
        logits = np.tile(log_alpha, (n, 1))
        edges_on = None
        if use_edges:
            edges_on = adjacency @ current
            col = current.sum(axis=0)
            edges_off = (col[None, :] - current) - edges_on
            logits = logits + edges_on @ log_pi.T + edges_off @ log_not.T
        if d2 is not None:
            logits = logits + gauss
        logits -= logsumexp(logits, axis=1, keepdims=True)
        update = np.exp(logits)
        update /= update.sum(axis=1, keepdims=True)
        return update, edges_on

    start_bound = None
    best_bound = -np.inf
    best_resp = resp
    current = resp
    for _ in range(cfg.max_fixedpoint_sweeps):
        update, edges_on = sweep(current)
        if use_edges or start_bound is None:
            value = bound_at(current, edges_on)
            if start_bound is None:
                start_bound = value
            if value > best_bound:
                best_bound, best_resp = value, current
        residual = np.abs(update - current).max()
        current = (1.0 - cfg.damping) * update + cfg.damping * current
        if residual <= cfg.fixedpoint_tol:
            break

    final_bound = bound_at(current)
    if final_bound >= start_bound - 1e-9:
        return current
    return best_resp if best_bound > final_bound else current


# ---------------------------------------------------------------------------
# M-step


def m_step(graph: Graph, features: FeatureMatrix, resp: np.ndarray,
           mode: str = "joint", pi_eps: float = PI_EPS,
           sigma2_floor: float = SIGMA2_FLOOR) -> ModelParams:
    """Closed-form bound maximiser at fixed responsibilities.

    Raises
    ------
    EmptyClassError
        If any class has total mass below 1e-10; the fit driver reacts by
        re-seeding that class.
    """
    use_edges, use_features = _mode_flags(mode)
    resp = np.asarray(resp, dtype=np.float64)
    if resp.ndim != 2 or resp.shape[0] != graph.n:
        raise ValueError(
            f"responsibilities must have {graph.n} rows, got shape {resp.shape}"
        )
    resp = check_responsibilities(resp, graph.n, resp.shape[1])
    n, n_classes = resp.shape
    col = resp.sum(axis=0)
    empty = np.nonzero(col < EMPTY_CLASS_MASS)[0]
    if empty.size:
        raise EmptyClassError(empty.tolist())

    alpha = col / n

    if use_edges:
        on = resp.T @ (graph.adjacency @ resp)
        den = np.outer(col, col) - resp.T @ resp
        with np.errstate(invalid="ignore", divide="ignore"):
            pi = np.where(den > 0, on / np.where(den > 0, den, 1.0), 0.5)
        pi = (pi + pi.T) / 2.0
        pi = np.clip(pi, pi_eps, 1.0 - pi_eps)
    else:
        pi = np.full((n_classes, n_classes), 0.5)

    p = features.p
    if use_features and p:
        mu = (resp.T @ features.values) / col[:, None]
        scatter = float((resp * squared_distances(features.values, mu)).sum())
        sigma2 = max(scatter / (p * n), sigma2_floor)
    else:
        mu = np.zeros((n_classes, p))
        sigma2 = sigma2_floor

    return ModelParams(alpha=alpha, pi=pi, mu=mu, sigma2=sigma2)


def _reseed_empty_classes(resp: np.ndarray, empty_classes) -> np.ndarray:
    """Give each empty class one vertex: the least confidently assigned."""
    resp = resp.copy()
    confidence = resp.max(axis=1)
    candidates = iter(np.argsort(confidence, kind="stable"))
    for q in empty_classes:
        i = next(candidates)
        row = resp[i].copy()
        row[q] = 0.0
        total = row.sum()
        if total > 0:
            row *= 0.1 / total
        else:
            row[:] = 0.1 / (resp.shape[1] - 1)
        row[q] = 0.9
        resp[i] = row / row.sum()
    return resp


def _m_step_with_rescue(graph, features, resp, mode, attempts=_RESCUE_ATTEMPTS):
    for attempt in range(attempts + 1):
        try:
            return m_step(graph, features, resp, mode=mode), resp
        except EmptyClassError as err:
            if attempt == attempts:
                raise
            resp = _reseed_empty_classes(resp, err.empty_classes)


# ---------------------------------------------------------------------------
# Drivers


def fit(graph: Graph, features: FeatureMatrix, n_classes: int,
        cfg: EMConfig | None = None, resp_init: np.ndarray | None = None,
        mode: str = "joint") -> FitResult:
    """Run EM from one starting point.

    Records the lower bound after every M-step; stops when the relative
    bound change drops below ``cfg.bound_rel_tol`` (converged) or the
    iteration cap is hit. The recorded trace is non-decreasing: an
    iteration that would lower the bound (possible only after an
    empty-class re-seed) is rolled back and the run stops there.
    """
    cfg = cfg or EMConfig()
    if features.n != graph.n:
        raise ValueError(
            f"features have {features.n} rows but the graph has {graph.n} vertices"
        )
    if resp_init is None:
        rng = np.random.default_rng(cfg.rng_seed)
        # The graph-only mode must not see the features anywhere, the
        # initialisation included.
        init_features = features if mode != "graph-only" \
            else FeatureMatrix.empty(graph.n)
        resp = init_responsibilities(graph, init_features, n_classes,
                                     cfg.init_strategy, rng)
    else:
        resp = check_responsibilities(resp_init, graph.n, n_classes)

    params, resp = _m_step_with_rescue(graph, features, resp, mode)
    trace = [mode_lower_bound(graph, features, resp, params, mode)]
    converged = False
    for _ in range(cfg.max_em_iters):
        new_resp = e_step(graph, features, params, resp, cfg, mode)
        new_params, new_resp = _m_step_with_rescue(graph, features, new_resp, mode)
        value = mode_lower_bound(graph, features, new_resp, new_params, mode)
        if value < trace[-1] - 1e-9:
            break
        resp, params = new_resp, new_params
        previous = trace[-1]
        trace.append(value)
        if abs(value - previous) <= cfg.bound_rel_tol * max(1.0, abs(previous)):
            converged = True
            break

    return FitResult(
        params=params,
        responsibilities=resp,
        partition=partition_from_responsibilities(resp),
        bound_trace=trace,
        converged=converged,
        mode=mode,
    )


def _restart_strategy(index: int, cfg: EMConfig, has_features: bool) -> str:
    if has_features:
        if index == 0:
            return "feature-kmeans"
        if index == 1:
            return "graph-degree-quantile"
        return cfg.init_strategy
    # Without usable features, k-means falls back to the adjacency rows;
    # those hard starts escape the symmetric fixed point that traps soft
    # random rows.
    return "graph-degree-quantile" if index == 0 else "feature-kmeans"


def restart_configs(cfg: EMConfig, has_features: bool) -> list[EMConfig]:
    """Per-restart configs: distinct derived seeds, varied init strategies."""
    children = np.random.SeedSequence(cfg.rng_seed).spawn(cfg.n_restarts)
    return [
        replace(
            cfg,
            rng_seed=int(child.generate_state(1)[0]),
            init_strategy=_restart_strategy(r, cfg, has_features),
        )
        for r, child in enumerate(children)
    ]


def fit_multi_restart(graph: Graph, features: FeatureMatrix, n_classes: int,
                      cfg: EMConfig | None = None, mode: str = "joint",
                      return_all: bool = False):
    """Best-of-``cfg.n_restarts`` EM runs, selected by final bound.

    Restart seeds derive from ``cfg.rng_seed``; the first two restarts use
    the structured initialisers, the rest ``cfg.init_strategy`` (k-means on
    the adjacency rows when there are no usable features). Ties keep the
    earliest restart. Raises if every restart fails.
    """
    cfg = cfg or EMConfig()
    results: list[FitResult | None] = []
    errors: list[str] = []
    usable_features = features.p > 0 and mode != "graph-only"
    for restart_cfg in restart_configs(cfg, has_features=usable_features):
        try:
            results.append(fit(graph, features, n_classes, restart_cfg, mode=mode))
        except EmptyClassError as err:
            results.append(None)
            errors.append(str(err))
    best = None
    for result in results:
        if result is not None and (best is None
                                   or result.final_bound > best.final_bound):
            best = result
    if best is None:
        raise RuntimeError(
            f"all {cfg.n_restarts} restarts failed: {errors}"
        )
    if return_all:
        return best, [r for r in results if r is not None]
    return best


def fit_ablation(graph: Graph, features: FeatureMatrix, n_classes: int,
                 cfg: EMConfig | None = None, mode: str = "joint") -> FitResult:
    """Fit with the edge term, the feature term, or both (``joint``)."""
    _mode_flags(mode)
    return fit(graph, features, n_classes, cfg, mode=mode)
