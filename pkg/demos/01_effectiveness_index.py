"""
Effectiveness index: geometric vs linear aggregation
====================================================

Four component scores (Quality, Enrichment, Integration, Operational impact)
combined two ways. The geometric index punishes a weak component much harder
than a weighted average does.
"""

import numpy as np

from ctiroi import ScoreVector, TieiWeights, compute_tiei, relative_change

weights = TieiWeights(0.40, 0.20, 0.25, 0.15)
healthy = compute_tiei(ScoreVector(85, 70, 60, 90), weights)
print(f"healthy program   TIEI {healthy.tiei:6.2f}   linear {healthy.linear:6.2f}")

# integration stalls: the feeds are bought but barely wired into tooling
stalled = compute_tiei(ScoreVector(85, 70, 20, 90), weights)
print(f"stalled program   TIEI {stalled.tiei:6.2f}   linear {stalled.linear:6.2f}")

print(f"drop: linear {relative_change(healthy.linear, stalled.linear):+.1f}%, "
      f"TIEI {relative_change(healthy.tiei, stalled.tiei):+.1f}%")

# equal scores: both aggregates agree and the weights stop mattering
for w in (weights, TieiWeights(0.25, 0.25, 0.25, 0.25), TieiWeights(0.7, 0.1, 0.1, 0.1)):
    r = compute_tiei(ScoreVector(64, 64, 64, 64), w)
    print(f"uniform 64 with weights {w.as_tuple()}: TIEI {r.tiei:.6f}")

# a component at zero is floored to 1 rather than zeroing the whole index
r = compute_tiei(ScoreVector.floored(85, 70, 0, 90), weights, ["I: zero capability recorded, floored to 1"])
print(f"integration absent: TIEI {r.tiei:.2f} ({r.annotations[0]})")

# gap between the two views as one component degrades
for s in np.linspace(100, 1, 12):
    r = compute_tiei(ScoreVector(85, 70, s, 90), weights)
    print(f"  I={s:6.2f}  TIEI {r.tiei:6.2f}  linear {r.linear:6.2f}  gap {r.linear - r.tiei:5.2f}")
