import math

import numpy as np
import pytest

from cohsmix.em import EMConfig
from cohsmix.model import FeatureMatrix, ModelParams
from cohsmix.selection import icl_penalty, icl_score, select_q
from cohsmix.simulate import AffiliationSpec, generate

from conftest import random_graph, random_instance


def penalty_by_hand(q, n, p):
    pair_log = math.log(n * (n - 1) / 2)
    connectivity = 0.5 * q * (q - 1) * pair_log
    proportions = (q - 1) / 2 * math.log(n)
    covariates = p * (p - 1) * pair_log + p * q * pair_log
    return connectivity + proportions + covariates


@pytest.mark.parametrize("q,n,p", [
    (1, 10, 0), (2, 10, 1), (2, 150, 3), (3, 150, 3), (4, 150, 3),
    (5, 150, 15), (2, 50, 0), (6, 200, 2), (12, 150, 3), (3, 1000, 100),
])
def test_penalty_closed_form(q, n, p):
    assert icl_penalty(q, n, p) == pytest.approx(penalty_by_hand(q, n, p),
                                                 rel=1e-12)


def test_penalty_difference_between_two_and_three_classes():
    # With equal likelihood terms the criterion difference is purely the
    # penalty difference: [ (6-2)/2 + 3 ] * log(150*149/2) + log(150)/2.
    n, p = 150, 3
    expected = (0.5 * (6 - 2) + 3) * math.log(150 * 149 / 2) \
        + 0.5 * math.log(150)
    assert icl_penalty(3, n, p) - icl_penalty(2, n, p) == pytest.approx(
        expected, rel=1e-12
    )


def test_penalty_without_features_is_graph_only():
    q, n = 3, 120
    expected = 0.5 * q * (q - 1) * math.log(n * (n - 1) / 2) \
        + 0.5 * (q - 1) * math.log(n)
    assert icl_penalty(q, n, 0) == pytest.approx(expected, rel=1e-12)


def test_penalty_decreases_criterion_in_q():
    values = [icl_penalty(q, 150, 3) for q in range(1, 8)]
    assert all(b > a for a, b in zip(values, values[1:]))


def test_penalty_needs_two_vertices():
    with pytest.raises(ValueError):
        icl_penalty(2, 1, 0)


def test_icl_score_relabel_invariance(rng):
    from cohsmix.em import fit

    graph, features, _ = random_instance(rng, n=12, n_classes=2, p=2)
    result = fit(graph, features, 2, EMConfig(rng_seed=0))
    base = icl_score(result, graph, features)

    perm = np.array([1, 0])
    relabeled = result
    relabeled.params = ModelParams(alpha=result.params.alpha[perm],
                                   pi=result.params.pi[np.ix_(perm, perm)],
                                   mu=result.params.mu[perm],
                                   sigma2=result.params.sigma2)
    relabeled.responsibilities = result.responsibilities[:, perm]
    relabeled.partition = np.argmax(relabeled.responsibilities, axis=1)
    assert icl_score(relabeled, graph, features) == pytest.approx(base,
                                                                  abs=1e-9)


def test_icl_hard_and_soft_differ_in_general(rng):
    from cohsmix.em import fit

    graph, features, _ = random_instance(rng, n=12, n_classes=2, p=2)
    result = fit(graph, features, 2, EMConfig(rng_seed=3))
    soft = icl_score(result, graph, features)
    hard = icl_score(result, graph, features, hard_assignment=True)
    assert np.isfinite(soft) and np.isfinite(hard)


def test_select_single_candidate_returns_it():
    spec = AffiliationSpec(n_classes=2, n=30, n_features=2,
                           within_prob=0.5, between_prob=0.2,
                           mean_gap=1.5, seed=0)
    graph, features, _ = generate(spec)
    scan = select_q(graph, features, 2, 2,
                    EMConfig(rng_seed=0, n_restarts=2))
    assert scan.selected_q == 2
    assert scan.best.icl == scan.scores[2]


def test_select_range_validation(rng):
    graph = random_graph(5, rng)
    with pytest.raises(ValueError):
        select_q(graph, FeatureMatrix.empty(5), 3, 2)


def test_select_noise_prefers_smallest(rng):
    picked_smallest = 0
    runs = 10
    for seed in range(runs):
        spec = AffiliationSpec(n_classes=3, n=100, n_features=3,
                               within_prob=0.3, between_prob=0.3,
                               mean_gap=0.0, seed=seed)
        graph, features, _ = generate(spec)
        scan = select_q(graph, features, 2, 4,
                        EMConfig(rng_seed=seed, n_restarts=3))
        picked_smallest += scan.selected_q == 2
    assert picked_smallest >= 0.8 * runs


def test_scan_replays_bit_for_bit():
    spec = AffiliationSpec(n_classes=2, n=40, n_features=2,
                           within_prob=0.5, between_prob=0.15,
                           mean_gap=2.0, seed=4)
    graph, features, _ = generate(spec)
    cfg = EMConfig(rng_seed=77, n_restarts=3)
    first = select_q(graph, features, 1, 3, cfg)
    second = select_q(graph, features, 1, 3, cfg)
    assert first.selected_q == second.selected_q
    assert first.scores == second.scores
    for q in first.results:
        assert np.array_equal(first.results[q].responsibilities,
                              second.results[q].responsibilities)
