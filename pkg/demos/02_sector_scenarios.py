"""
Sector scenarios: annualized loss and return on CTI spend
=========================================================

ALE = frequency x magnitude; intelligence cuts the frequency, and the return
is the avoided loss per unit of program cost.
"""

from ctiroi import (
    BUILTIN_SCENARIOS,
    AleScenario,
    TcoBreakdown,
    ThreatScenario,
    UncertainValue,
    compute_tco,
    evaluate_scenario,
    monte_carlo_scenario,
    roi_cost_avoidance,
)

for key, s in BUILTIN_SCENARIOS.items():
    r = evaluate_scenario(s)
    print(f"{key:<11} ALE0 {r.ale0 / 1e6:5.2f}M  with CTI {r.ale_cti / 1e6:5.2f}M  "
          f"avoided {r.delta_ale / 1e6:5.2f}M  cost {r.cost / 1e6:4.2f}M  R {r.roi_ratio:4.2f}")

# the same finance case through the cost-avoidance lens
tco = compute_tco(TcoBreakdown(platform=200e3, feeds=150e3, personnel=150e3))
fraud = ThreatScenario("payment fraud", p=0.48, c=6.08e6, m=0.60)
print(f"\nTCO {tco:,.0f}; cost-avoidance ROI {roi_cost_avoidance([fraud], tco):.1f}%")

# uncertain inputs: frequency and magnitude as ranges instead of points
ransomware = AleScenario(
    lef0=UncertainValue.triangular(0.50, 0.67, 0.80),
    lm=UncertainValue.pert(6e6, 11.62e6, 25e6),
    cti_cost=0.6e6,
    reduction=0.60,
    name="hospital ransomware",
)
mc = monte_carlo_scenario(ransomware, 200_000, seed=2024)
st = mc.variable_stats["roi_ratio"]
print(f"\n{ransomware.name}: mean R {st.mean:.2f}, 90% band [{st.p5:.2f}, {st.p95:.2f}]")
print(f"P50 avoided loss {mc.variable_stats['delta_ale'].p50 / 1e6:.2f}M")

# point-valued inputs reproduce the analytic answer exactly
point = monte_carlo_scenario(BUILTIN_SCENARIOS["healthcare"], 1000, seed=1)
print("point MC == analytic:", point.delta_ale == evaluate_scenario(BUILTIN_SCENARIOS["healthcare"]).delta_ale)
