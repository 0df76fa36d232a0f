"""
How much to spend: the Gordon-Loeb investment model
===================================================

Minimize spend z plus expected loss L*g(z). For the two classic breach
functions the optimum never exceeds v*L/e.
"""

import math

import numpy as np

from ctiroi import (
    BreachFunction,
    LossMultiplier,
    PortfolioSpec,
    gl_upper_bound,
    net_benefit,
    optimal_investment_single,
    optimal_investment_two_param,
    optimize_portfolio,
)

L = 10e6
f = BreachFunction.gl_i(v=0.5, alpha=1e-5, beta=1)
opt = optimal_investment_single(f, L)
print(f"class I:  z* = {opt.z_star:,.0f}   bound vL/e = {gl_upper_bound(0.5, L):,.0f}")
print(f"          closed form {(math.sqrt(1e-5 * 0.5 * L) - 1) / 1e-5:,.0f}")
print(f"          net benefit {net_benefit(f, L, opt.z_star):,.0f}")

g = BreachFunction.gl_ii(v=0.5, alpha=1e-6)
print(f"class II: z* = {optimal_investment_single(g, L).z_star:,.0f}")

# the optimum tracks the size of the potential loss
for loss in np.geomspace(1e5, 1e8, 7):
    z = optimal_investment_single(f, loss).z_star
    print(f"  L = {loss:>13,.0f}  z* = {z:>12,.0f}  ({z / loss:6.2%} of L)")

# intelligence that also shrinks the loss when a breach happens
h = LossMultiplier.rational(gamma=2e-6)
two = optimal_investment_two_param(f, h, L)
print(f"\nwith loss reduction: z* = {two.z_star:,.0f} (bound {two.bound:,.0f})")

# three controls sharing one budget
controls = (
    BreachFunction.gl_i(0.6, 2e-6, 1),
    BreachFunction.gl_ii(0.7, 5e-7),
    BreachFunction.gl_i(0.8, 1e-6, 2),
)
free = optimize_portfolio(PortfolioSpec(controls), L)
capped = optimize_portfolio(PortfolioSpec(controls, budget_cap=0.5e6), L)
print("\nportfolio:", ", ".join(f"{z:,.0f}" for z in free.z_star), f"total {sum(free.z_star):,.0f}")
print("capped:   ", ", ".join(f"{z:,.0f}" for z in capped.z_star), f"total {sum(capped.z_star):,.0f}")
print(f"cost of the cap: {capped.objective_value - free.objective_value:,.0f}")
