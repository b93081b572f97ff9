"""
Three ways to find triangles in one map-reduce round
====================================================

Each scheme hashes nodes into buckets and sends every edge to the reducers
that might need it.  They differ in how many reducers an edge reaches.
"""

from subgraph_mr import generate_cqs, gnm, run_round, triangle
from subgraph_mr.cli import asymptotic_replication, compare_buckets

# a sparse random graph, small enough to run in a few seconds
g = gnm(4000, 20000, seed=7)
print(g)

# pick, per scheme, the largest bucket count that fits about 220 reducers
k = 220
buckets = compare_buckets(k)
print("buckets per scheme:", buckets)

cqs = generate_cqs(triangle())
found = {}
for scheme, b in buckets.items():
    instances, report = run_round(g, scheme, cqs, b=b, seed=0)
    # node tuples follow each scheme's node order, so compare as node sets
    found[scheme] = {frozenset(t) for _, t in instances}
    print(f"{scheme:<15} b={b:<3} reducers={report.distinct_reducers_used:<4} "
          f"per-edge={report.per_edge_replication:7.3f} "
          f"(leading order {asymptotic_replication(scheme, k):6.2f})  triangles={len(instances)}")

# all three agree, and no reducer reported a triangle another one also found
assert len({frozenset(s) for s in found.values()}) == 1

# the multiway mapper really sends 3b copies of an edge; two of them land on
# the same reducer, so the distinct count is 3b - 2
_, rep = run_round(g, "multiway", cqs, b=6, evaluate=False)
print("multiway raw copies per edge:", rep.raw_pairs / rep.edge_count,
      "distinct:", rep.per_edge_replication)
