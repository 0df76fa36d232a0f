"""
Where the weights come from
===========================

Pairwise judgments from a stakeholder workshop, reduced to a weight vector
by the principal eigenvector, with a consistency check on the judgments.
"""

import numpy as np

from ctiroi import ScoreVector, TieiWeights, compute_tiei, consistent_matrix, derive_weights_ahp, weights_from_budget

# judgments that agree with one another perfectly
target = (0.40, 0.20, 0.25, 0.15)
r = derive_weights_ahp(consistent_matrix(target))
print("consistent:", np.round(r.weights, 6), f"CR {r.consistency_ratio:.1e}")

# a workshop answer sheet: Quality vs Enrichment 2, Quality vs Integration 2, ...
workshop = np.array([
    [1,   2,   2,   3],
    [1/2, 1,   1/2, 2],
    [1/2, 2,   1,   2],
    [1/3, 1/2, 1/2, 1],
])
r = derive_weights_ahp(workshop)
print("workshop:  ", np.round(r.weights, 3), f"lambda_max {r.lambda_max:.3f}  CR {r.consistency_ratio:.3f}",
      "ok" if r.acceptable else "revisit")

# someone insists integration beats quality 5:1, which breaks transitivity
bad = workshop.copy()
bad[2, 0], bad[0, 2] = 5, 1 / 5
r_bad = derive_weights_ahp(bad)
print("contrarian:", np.round(r_bad.weights, 3), f"CR {r_bad.consistency_ratio:.3f}",
      "ok" if r_bad.acceptable else "revisit")

# alternatively: hand out 100 points
votes = weights_from_budget([40, 20, 25, 15])
print("budget vote:", votes)

scores = ScoreVector(85, 70, 60, 90)
for label, w in (("workshop", r.weights), ("budget", votes)):
    print(f"TIEI with {label} weights: {compute_tiei(scores, TieiWeights(*w)).tiei:.2f}")
