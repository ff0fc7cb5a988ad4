"""Data containers and exact objective evaluation for the latent-class model.

The model places each vertex in one of Q hidden classes. Edges of an
undirected binary graph are Bernoulli with a probability that depends only
on the two endpoint classes, and each vertex carries a feature vector drawn
from a spherical Gaussian centred on its class mean. Everything here is a
pure function of immutable inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp, xlogy

# Clamps keeping log terms finite on degenerate data.
PI_EPS = 1e-6
SIGMA2_FLOOR = 1e-8

# Enumeration guard for the exact marginal.
MAX_ENUM_TERMS = 1_000_000


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Graph:
    """Undirected binary graph without self-loops.

    Parameters
    ----------
    adjacency : ndarray of shape (n, n)
        Symmetric 0/1 matrix with a zero diagonal. The matrix is copied and
        frozen; the sorted edge-pair view is derived from it on demand.
    """

    adjacency: np.ndarray

    def __post_init__(self):
        adj = np.array(self.adjacency, dtype=np.float64, copy=True)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise ValueError(f"adjacency must be square, got shape {adj.shape}")
        if np.any((adj != 0.0) & (adj != 1.0)):
            raise ValueError("adjacency entries must be 0 or 1")
        if np.any(adj != adj.T):
            raise ValueError("adjacency must be symmetric (undirected graph)")
        if np.any(np.diag(adj) != 0.0):
            raise ValueError("self-loops are not allowed (diagonal must be zero)")
        object.__setattr__(self, "adjacency", _freeze(adj))

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @property
    def n_edges(self) -> int:
        return int(round(self.adjacency.sum())) // 2

    def edge_pairs(self) -> np.ndarray:
        """Sorted (i, j) pairs with i < j, one row per edge."""
        i, j = np.nonzero(np.triu(self.adjacency, k=1))
        return np.column_stack([i, j])

    @classmethod
    def from_edge_pairs(cls, n: int, pairs) -> "Graph":
        """Build a graph from vertex-index pairs; order within a pair is free."""
        adj = np.zeros((n, n))
        pairs = np.atleast_2d(np.asarray(pairs, dtype=np.int64).reshape(-1, 2))
        for i, j in pairs:
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"edge ({i}, {j}) out of range for n={n}")
            if i == j:
                raise ValueError(f"self-loop ({i}, {i}) is not allowed")
            adj[i, j] = adj[j, i] = 1.0
        return cls(adj)


@dataclass(frozen=True)
class FeatureMatrix:
    """Per-vertex real feature rows; p = 0 (no features) is allowed."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.float64, copy=True)
        if vals.ndim != 2:
            raise ValueError(f"features must be 2-d (n, p), got shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("features must be finite")
        object.__setattr__(self, "values", _freeze(vals))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]

    @classmethod
    def empty(cls, n: int) -> "FeatureMatrix":
        return cls(np.zeros((n, 0)))


@dataclass(frozen=True)
class ModelParams:
    """Class proportions, connectivity matrix, class means, shared variance.

    ``sigma2`` is the per-coordinate variance of the spherical Gaussian
    attached to each class. ``pi`` must be symmetric because the graph is
    undirected.
    """

    alpha: np.ndarray
    pi: np.ndarray
    mu: np.ndarray
    sigma2: float

    def __post_init__(self):
        alpha = np.array(self.alpha, dtype=np.float64, copy=True)
        pi = np.array(self.pi, dtype=np.float64, copy=True)
        mu = np.atleast_2d(np.array(self.mu, dtype=np.float64, copy=True))
        q = alpha.shape[0]
        if alpha.ndim != 1 or q < 1:
            raise ValueError("alpha must be a non-empty vector")
        if np.any(alpha < 0) or abs(alpha.sum() - 1.0) > 1e-8:
            raise ValueError("alpha must be a probability vector")
        if pi.shape != (q, q):
            raise ValueError(f"pi must have shape ({q}, {q}), got {pi.shape}")
        if np.any(pi < 0) or np.any(pi > 1):
            raise ValueError("pi entries must lie in [0, 1]")
        if not np.allclose(pi, pi.T, atol=1e-8):
            raise ValueError("pi must be symmetric (undirected graph)")
        if mu.shape[0] != q:
            raise ValueError(f"mu must have {q} rows, got {mu.shape[0]}")
        if not (np.isfinite(self.sigma2) and self.sigma2 > 0):
            raise ValueError("sigma2 must be a positive finite scalar")
        object.__setattr__(self, "alpha", _freeze(alpha))
        object.__setattr__(self, "pi", _freeze((pi + pi.T) / 2.0))
        object.__setattr__(self, "mu", _freeze(mu))
        object.__setattr__(self, "sigma2", float(self.sigma2))

    @property
    def n_classes(self) -> int:
        return self.alpha.shape[0]

    @property
    def n_features(self) -> int:
        return self.mu.shape[1]

    def clamped(self, pi_eps: float = PI_EPS,
                sigma2_floor: float = SIGMA2_FLOOR) -> "ModelParams":
        """Copy with connection probabilities and variance pushed off 0/1/0."""
        return ModelParams(
            alpha=self.alpha,
            pi=np.clip(self.pi, pi_eps, 1.0 - pi_eps),
            mu=self.mu,
            sigma2=max(self.sigma2, sigma2_floor),
        )


def check_responsibilities(resp, n: int, n_classes: int) -> np.ndarray:
    """Validate an (n, Q) row-stochastic matrix and return it as float64."""
    resp = np.asarray(resp, dtype=np.float64)
    if resp.shape != (n, n_classes):
        raise ValueError(
            f"responsibilities must have shape ({n}, {n_classes}), got {resp.shape}"
        )
    if np.any(resp < -1e-12):
        raise ValueError("responsibilities must be non-negative")
    if not np.allclose(resp.sum(axis=1), 1.0, atol=1e-8):
        raise ValueError("responsibility rows must each sum to 1")
    return resp


def partition_from_responsibilities(resp) -> np.ndarray:
    """Hard labels by row-wise argmax; ties go to the lowest class index."""
    return np.argmax(np.asarray(resp), axis=1)


def one_hot(labels, n_classes: int) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64)
    if labels.ndim != 1:
        raise ValueError("labels must be a vector")
    if labels.size and (labels.min() < 0 or labels.max() >= n_classes):
        raise ValueError(f"labels must lie in [0, {n_classes})")
    hot = np.zeros((labels.shape[0], n_classes))
    hot[np.arange(labels.shape[0]), labels] = 1.0
    return hot


def responsibility_entropy(resp) -> float:
    """-sum resp * log resp with the 0*log 0 = 0 convention."""
    resp = np.asarray(resp, dtype=np.float64)
    return float(-xlogy(resp, resp).sum())


def _check_dims(graph: Graph, features: FeatureMatrix, params: ModelParams):
    if features.n != graph.n:
        raise ValueError(
            f"features have {features.n} rows but the graph has {graph.n} vertices"
        )
    if params.n_features != features.p:
        raise ValueError(
            f"params expect {params.n_features} features, data has {features.p}"
        )


def _soft_assignment(assignment, n: int, n_classes: int) -> np.ndarray:
    arr = np.asarray(assignment)
    if arr.ndim == 1:
        return one_hot(arr, n_classes)
    return check_responsibilities(arr, n, n_classes)


def proportion_log_likelihood(resp, alpha) -> float:
    """Class-proportion part: sum of expected log alpha over vertices."""
    col = np.asarray(resp).sum(axis=0)
    return float(xlogy(col, np.asarray(alpha)).sum())


def edge_log_likelihood(adjacency, resp, pi) -> float:
    """Bernoulli edge part summed over unordered vertex pairs.

    Pair (i, j) with i < j contributes the expected log edge probability,
    the expectation replacing the class-indicator product by the product of
    responsibilities of the two distinct endpoints.
    """
    resp = np.asarray(resp)
    pi = np.asarray(pi)
    col = resp.sum(axis=0)
    on = resp.T @ (adjacency @ resp)
    off = np.outer(col, col) - resp.T @ resp - on
    return float(0.5 * (xlogy(on, pi).sum() + xlogy(off, 1.0 - pi).sum()))


def feature_log_likelihood(features: FeatureMatrix, resp, mu, sigma2) -> float:
    """Spherical-Gaussian feature part with the full normalising constant."""
    if features.p == 0:
        return 0.0
    resp = np.asarray(resp)
    d2 = squared_distances(features.values, np.asarray(mu))
    total = resp.sum()
    const = -0.5 * features.p * np.log(2.0 * np.pi * sigma2)
    return float(const * total - (resp * d2).sum() / (2.0 * sigma2))


def squared_distances(points, centers) -> np.ndarray:
    """Pairwise squared Euclidean distances, shape (n_points, n_centers)."""
    points = np.asarray(points, dtype=np.float64)
    centers = np.atleast_2d(np.asarray(centers, dtype=np.float64))
    pp = (points * points).sum(axis=1)[:, None]
    cc = (centers * centers).sum(axis=1)[None, :]
    d2 = pp + cc - 2.0 * points @ centers.T
    return np.maximum(d2, 0.0)


def complete_log_likelihood(graph: Graph, features: FeatureMatrix,
                            assignment, params: ModelParams) -> float:
    """Joint log-probability of graph, features, and a class assignment.

    Parameters
    ----------
    assignment : ndarray
        Either a length-n integer label vector (hard assignment) or an
        (n, Q) row-stochastic responsibility matrix, in which case the
        expectation of the hard-assignment expression is returned with
        indicator products replaced by responsibility products.
    """
    _check_dims(graph, features, params)
    resp = _soft_assignment(assignment, graph.n, params.n_classes)
    return (
        proportion_log_likelihood(resp, params.alpha)
        + edge_log_likelihood(graph.adjacency, resp, params.pi)
        + feature_log_likelihood(features, resp, params.mu, params.sigma2)
    )


def variational_lower_bound(graph: Graph, features: FeatureMatrix,
                            resp, params: ModelParams) -> float:
    """Evidence lower bound: expected complete log-likelihood plus entropy.

    Equals the log-marginal likelihood minus the KL divergence between the
    factorised assignment distribution and the true posterior, hence never
    exceeds :func:`exact_log_marginal` for any responsibility matrix.
    """
    _check_dims(graph, features, params)
    resp = check_responsibilities(resp, graph.n, params.n_classes)
    return complete_log_likelihood(graph, features, resp, params) \
        + responsibility_entropy(resp)


def exact_log_marginal(graph: Graph, features: FeatureMatrix,
                       params: ModelParams,
                       max_terms: int = MAX_ENUM_TERMS) -> float:
    """Log-marginal likelihood by exhaustive enumeration of assignments.

    Only feasible for tiny instances (guarded at Q**n <= max_terms); used
    as an independent ceiling for the variational bound.
    """
    _check_dims(graph, features, params)
    n, q = graph.n, params.n_classes
    if n == 0:
        return 0.0
    n_terms = q ** n
    if n_terms > max_terms:
        raise ValueError(
            f"enumeration of {q}**{n} assignments exceeds the {max_terms} guard"
        )

    # Per-vertex term: log alpha_q plus the full Gaussian log-density.
    with np.errstate(divide="ignore"):
        vertex = np.tile(np.log(params.alpha), (n, 1))
        log_pi = np.log(params.pi)
        log_not = np.log1p(-params.pi)
    if features.p:
        d2 = squared_distances(features.values, params.mu)
        vertex = vertex - 0.5 * features.p * np.log(2.0 * np.pi * params.sigma2) \
            - d2 / (2.0 * params.sigma2)

    labels = np.array(
        np.unravel_index(np.arange(n_terms), (q,) * n), dtype=np.int32
    )  # (n, q**n)
    totals = np.zeros(n_terms)
    for i in range(n):
        totals += vertex[i, labels[i]]
    adj = graph.adjacency
    for i in range(n):
        for j in range(i + 1, n):
            table = log_pi if adj[i, j] else log_not
            totals += table[labels[i], labels[j]]
    return float(logsumexp(totals))
