"""
Choosing shares
===============

With k reducers arranged as a grid, each query variable gets a share (its
number of buckets).  An edge is copied once per grid cell that leaves the
shares of the other variables free, so the copy count is a posynomial in
the shares.  Minimizing it under a fixed product is convex in log space.
"""

import math

from subgraph_mr import cycle, generate_cqs, lollipop, square
from subgraph_mr.planner import (
    bidirectional_edges,
    cost_expression,
    optimize_shares,
    regular_mixed_shares,
    symbolic_plan,
)

# one lollipop query: W only meets X, so its share stays at 1
q = generate_cqs(lollipop())[0]
expr = cost_expression(q)
plan = optimize_shares(expr, 750)
print(q.render())
print("cost", expr.render())
print("shares", {n: round(x, 4) for n, x in plan.as_dict().items()}, "per edge", round(plan.cost_per_edge, 4))

# all three square queries share one grid; edges used in both directions
# carry weight 2
sq = cost_expression(generate_cqs(square()), "variable-oriented")
print("\nsquare group:", sq.render())
for k in (100, 10_000):
    plan = optimize_shares(sq, k)
    print(f"k={k:<6} shares", {n: round(x, 3) for n, x in plan.as_dict().items()},
          f"cost {plan.cost_per_edge:.3f} vs 4*sqrt(2k) = {4 * math.sqrt(2 * k):.3f}")

# hexagon: nodes on two-way edges get twice the share of the rest
cqs = generate_cqs(cycle(6))
plan = regular_mixed_shares(cycle(6), bidirectional_edges(cqs), 500_000)
sym = symbolic_plan(plan, 10**9)
print("\nhexagon shares", sym.shares)
print("copies per edge", sym.per_edge, "total", sym.total_communication, "per reducer", sym.per_reducer_load)
