"""
Sensitivity: curves and tornado ranges
======================================

Sweep one input at a time and watch the output. The integration sweep shows
the index and the linear average pulling apart as one component weakens.
"""

from ctiroi import BUILTIN_SCENARIOS, ScoreVector, SweepSpec, TieiWeights, sweep_scenario, sweep_tiei, tornado

base = (ScoreVector(85, 70, 60, 90), TieiWeights(0.40, 0.20, 0.25, 0.15))
points = sweep_tiei(SweepSpec("tiei:I", 1, 100, 100, base))
for p in points[::11]:
    t, lin = p.outputs["tiei"], p.outputs["linear"]
    bar = "#" * int(t / 2)
    print(f"I={p.x:5.1f}  TIEI {t:6.2f}  linear {lin:6.2f}  {bar}")

finance = BUILTIN_SCENARIOS["finance"]
print("\nfinance ROI against the frequency reduction CTI achieves:")
for p in sweep_scenario(SweepSpec("scenario:reduction", 0, 1, 6, finance)):
    print(f"  reduction {p.x:.1f}  R {p.outputs['roi_ratio']:.2f}")

# a cost of zero has no ratio; the point is flagged instead of failing the sweep
for p in sweep_scenario(SweepSpec("scenario:cti_cost", 0, 1e6, 3, finance)):
    print(f"  cost {p.x:>9,.0f}  ", p.notes[0] if p.flagged else f"R {p.outputs['roi_ratio']:.2f}")

print("\ntornado, finance base case (half to double each input):")
spans = {"lm": (3.04e6, 12.16e6), "lef0": (0.24, 0.96), "reduction": (0.3, 1.0), "cti_cost": (0.25e6, 1e6)}
for b in tornado(finance, spans):
    print(f"  {b.param:<10} R {b.roi_lo:5.2f} .. {b.roi_hi:5.2f}   swing {b.swing:.2f}")
