"""Small data-graph generators for tests, demos and benchmarks."""

from __future__ import annotations

import numpy as np

from .graph import DataGraph


def complete_graph(n: int) -> DataGraph:
    return DataGraph.from_edges([(u, v) for u in range(n) for v in range(u + 1, n)], nodes=range(n))


def cycle_graph(n: int) -> DataGraph:
    return DataGraph.from_edges([(i, (i + 1) % n) for i in range(n)], nodes=range(n))


def path_graph(n: int) -> DataGraph:
    return DataGraph.from_edges([(i, i + 1) for i in range(n - 1)], nodes=range(n))


def petersen_graph() -> DataGraph:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return DataGraph.from_edges(outer + spokes + inner)


def regular_tree(delta: int, depth: int) -> DataGraph:
    """Tree whose internal nodes all have degree ``delta`` (the root has ``delta`` children)."""
    edges = []
    frontier, nxt = [0], 1
    for level in range(depth):
        new = []
        for u in frontier:
            for _ in range(delta if level == 0 else delta - 1):
                edges.append((u, nxt))
                new.append(nxt)
                nxt += 1
        frontier = new
    return DataGraph.from_edges(edges, nodes=range(nxt))


def gnp(n: int, prob: float, seed: int = 0) -> DataGraph:
    """Erdos-Renyi ``G(n, p)`` on nodes ``0..n-1``."""
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(iu.size) < prob
    return DataGraph.from_edges(zip(iu[keep].tolist(), ju[keep].tolist()), nodes=range(n))


def gnm(n: int, m: int, seed: int = 0) -> DataGraph:
    """Uniform random simple graph with exactly ``m`` edges on ``n`` nodes."""
    total = n * (n - 1) // 2
    if m > total:
        raise ValueError(f"at most {total} edges fit on {n} nodes")
    rng = np.random.default_rng(seed)
    chosen: set[tuple[int, int]] = set()
    while len(chosen) < m:
        need = m - len(chosen)
        uv = rng.integers(0, n, size=(2 * need + 16, 2))
        uv = uv[uv[:, 0] != uv[:, 1]]
        lo = np.minimum(uv[:, 0], uv[:, 1])
        hi = np.maximum(uv[:, 0], uv[:, 1])
        for u, v in zip(lo.tolist(), hi.tolist()):
            chosen.add((u, v))
            if len(chosen) == m:
                break
    return DataGraph.from_edges(sorted(chosen), nodes=range(n))
