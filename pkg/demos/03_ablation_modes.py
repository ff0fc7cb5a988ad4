"""What each data source contributes: graph-only vs features-only vs joint.

Three regimes, each fitted in all three modes. The joint model matches the
better single source in the one-sided regimes and wins when both sources
carry partial signal.
"""

import numpy as np

from cohsmix import (
    AffiliationSpec,
    EMConfig,
    adjusted_rand_index,
    fit_multi_restart,
    generate,
)

REGIMES = {
    "graph signal only": AffiliationSpec(
        n_classes=3, n=120, n_features=3, within_prob=0.55,
        between_prob=0.05, mean_gap=0.0, seed=0),
    "feature signal only": AffiliationSpec(
        n_classes=3, n=120, n_features=3, within_prob=0.3,
        between_prob=0.3, mean_gap=2.5, seed=0),
    "weak signal in both": AffiliationSpec(
        n_classes=3, n=120, n_features=3, within_prob=0.42,
        between_prob=0.22, mean_gap=1.1, seed=0),
}

MODES = ("graph-only", "features-only", "joint")

print(f"{'regime':<22}" + "".join(f"{m:>16}" for m in MODES))
for name, spec in REGIMES.items():
    scores = []
    for mode in MODES:
        values = []
        for seed in range(5):
            graph, features, truth = generate(
                AffiliationSpec(**{**spec.__dict__, "seed": seed}))
            result = fit_multi_restart(graph, features, 3,
                                       EMConfig(rng_seed=seed, n_restarts=4),
                                       mode=mode)
            values.append(adjusted_rand_index(truth, result.partition))
        scores.append(float(np.median(values)))
    print(f"{name:<22}" + "".join(f"{s:>16.3f}" for s in scores))

print("\nscores are median adjusted Rand index over 5 replicates;")
print("1 means the hidden classes were recovered exactly.")
