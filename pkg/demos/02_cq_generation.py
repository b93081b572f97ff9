"""
Conjunctive queries that find each instance once
================================================

A sample graph with p nodes has p! orderings of its nodes.  Automorphisms
make many of them interchangeable; one query per remaining class, merged
when their edge orientations agree, finds every instance exactly once.
"""

from subgraph_mr import cycle, generate_cqs, lollipop, square
from subgraph_mr.cq import automorphisms
from subgraph_mr.cycles import canonical_run_sequences, cycle_class_count, cycle_cqs

for name, s in (("square", square()), ("lollipop", lollipop())):
    cqs = generate_cqs(s)
    print(f"{name}: {len(automorphisms(s))} automorphisms, {len(cqs)} queries")
    print(cqs.render())
    print()

# cycles get a shorter list: describe each ordering class by the lengths of
# its rising and falling runs around the cycle
for p in range(3, 9):
    runs = canonical_run_sequences(p)
    print(f"C{p}: {len(runs):>2} run classes {[r.digits for r in runs]}"
          f"  (orbit count {cycle_class_count(p)})")

print()
print("pentagon, run-sequence method:", len(cycle_cqs(5)), "queries;",
      "general method:", len(generate_cqs(cycle(5))))
print("hexagon run-sequence queries, with the digits they came from:")
for q, prov in zip(cycle_cqs(6), cycle_cqs(6).provenance):
    print(f"  [{prov[0]}] {q.render()}")
