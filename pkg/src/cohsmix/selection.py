"""Class-count selection by the integrated classification likelihood.

The criterion is the fitted complete-data log-likelihood minus closed-form
penalties for the connectivity, proportion, and feature parameters; the
candidate count with the highest score wins, ties going to the smaller one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .em import EMConfig, FitResult, fit_multi_restart
from .model import FeatureMatrix, Graph, complete_log_likelihood


def icl_penalty(n_classes: int, n_vertices: int, n_features: int) -> float:
    """Closed-form complexity penalty of the selection criterion.

    The connectivity block is penalised against the number of vertex pairs,
    the proportions against the number of vertices, and the feature block
    (means and shared variance) against the number of pairs as well. With
    no features the last part vanishes and the criterion reduces to the
    graph-only form.
    """
    if n_vertices < 2:
        raise ValueError("the criterion needs at least 2 vertices")
    q, n, p = n_classes, n_vertices, n_features
    pair_log = math.log(n * (n - 1) / 2.0)
    return (
        0.5 * q * (q - 1) * pair_log
        + 0.5 * (q - 1) * math.log(n)
        + p * (p - 1) * pair_log
        + p * q * pair_log
    )


def icl_score(fit: FitResult, graph: Graph, features: FeatureMatrix,
              hard_assignment: bool = False) -> float:
    """Criterion value of a fitted model on its data.

    The likelihood term uses the fitted soft responsibilities by default;
    ``hard_assignment=True`` switches to the argmax partition.
    """
    assignment = fit.partition if hard_assignment else fit.responsibilities
    log_lik = complete_log_likelihood(graph, features, assignment, fit.params)
    return log_lik - icl_penalty(fit.params.n_classes, graph.n, features.p)


@dataclass
class ICLScan:
    """Outcome of scanning a range of class counts."""

    q_min: int
    q_max: int
    results: dict[int, FitResult]
    scores: dict[int, float]
    failures: dict[int, str]
    selected_q: int

    @property
    def best(self) -> FitResult:
        return self.results[self.selected_q]


def select_q(graph: Graph, features: FeatureMatrix, q_min: int, q_max: int,
             cfg: EMConfig | None = None, mode: str = "joint",
             hard_assignment: bool = False) -> ICLScan:
    """Fit every candidate class count and keep the best-scoring one.

    Each candidate gets its own deterministic seed derived from
    ``cfg.rng_seed``, so the whole scan replays bit-for-bit. Candidates
    whose every restart fails are recorded and excluded; if all candidates
    fail the scan raises.
    """
    if not 1 <= q_min <= q_max:
        raise ValueError(f"need 1 <= q_min <= q_max, got {q_min}..{q_max}")
    cfg = cfg or EMConfig()
    results: dict[int, FitResult] = {}
    scores: dict[int, float] = {}
    failures: dict[int, str] = {}
    for q in range(q_min, q_max + 1):
        seed = np.random.SeedSequence(cfg.rng_seed, spawn_key=(q,))
        q_cfg = replace(cfg, rng_seed=int(seed.generate_state(1)[0]))
        try:
            result = fit_multi_restart(graph, features, q, q_cfg, mode=mode)
        except RuntimeError as err:
            failures[q] = str(err)
            continue
        result.icl = icl_score(result, graph, features, hard_assignment)
        results[q] = result
        scores[q] = result.icl
    if not results:
        raise RuntimeError(f"every candidate in {q_min}..{q_max} failed: {failures}")
    selected = min(scores)
    for q in sorted(scores):
        if scores[q] > scores[selected]:
            selected = q
    return ICLScan(q_min=q_min, q_max=q_max, results=results, scores=scores,
                   failures=failures, selected_q=selected)
