"""Shared test helpers: small random graphs and canonical instance sets."""

import itertools
import random

from subgraph_mr.cq import automorphisms
from subgraph_mr.graph import DataGraph, SampleGraph
from subgraph_mr.instances import canonical_instance


def random_graph(n, prob, seed):
    rng = random.Random(seed)
    edges = [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < prob]
    return DataGraph.from_edges(edges, nodes=range(n))


def relabel(g, seed, spread=10**6):
    """Same graph with node ids scattered, so id order differs from construction order."""
    rng = random.Random(seed)
    ids = rng.sample(range(spread), g.node_count)
    mp = dict(zip(g.nodes, ids))
    return DataGraph.from_edges([(mp[u], mp[v]) for u, v in g.edges], nodes=ids)


def naive_instances(g, s):
    """Independent oracle: test every injective tuple of data nodes."""
    auts = automorphisms(s)
    out = set()
    for t in itertools.permutations(sorted(g.nodes), s.p):
        if all(g.has_edge(t[a], t[b]) for a, b in s.edges):
            out.add(canonical_instance(t, auts))
    return out


def canon(s, tuples):
    auts = automorphisms(s)
    return [canonical_instance(t, auts) for t in tuples]


def random_sample(rng, p_max=5):
    p = rng.randint(2, p_max)
    edges = [(a, b) for a in range(p) for b in range(a + 1, p) if rng.random() < 0.55]
    if not edges:
        edges = [(0, 1)]
    return SampleGraph(tuple(f"X{i + 1}" for i in range(p)), tuple(edges))
