"""Serial enumerators: the brute-force oracle, properly ordered 2-paths,
OddCycle, decomposition plus composition, and the bounded-degree method.

Every enumerator returns a sorted list of instances, each the node tuple
(in sample-variable order) that is smallest in its automorphism orbit.  A
list rather than a set keeps accidental duplicates visible to tests.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .cq import automorphisms
from .graph import DataGraph, NodeOrder, SampleGraph, make_order
from .instances import canonical_instance
from .planner import StructuralError

ORACLE_MAX_NODES = 60

Instance = tuple


class OracleSizeError(ValueError):
    pass


# ---------------------------------------------------------------- oracle


def _search_order(s: SampleGraph) -> list[int]:
    """Sample nodes so that each one, where possible, touches an earlier one."""
    adj = s.adjacency()
    order: list[int] = []
    left = set(range(s.p))
    while left:
        linked = [v for v in left if adj[v] & set(order)]
        pool = linked or list(left)
        v = max(pool, key=lambda x: (len(adj[x] & set(order)), len(adj[x]), -x))
        order.append(v)
        left.discard(v)
    return order


def brute_force_oracle(g: DataGraph, s: SampleGraph, max_nodes: int = ORACLE_MAX_NODES) -> list[Instance]:
    """Every edge-preserving injective mapping, one per automorphism class.

    Backtracks over sample nodes.  Of each orbit only the mapping whose node
    tuple is lexicographically smallest is kept.
    """
    if g.node_count > max_nodes and s.p > 2:
        raise OracleSizeError(
            f"oracle limited to {max_nodes} data nodes for p > 2 (graph has {g.node_count})"
        )
    auts = automorphisms(s)
    adj = s.adjacency()
    order = _search_order(s)
    all_nodes = sorted(g.nodes)
    val = [-1] * s.p
    used: set[int] = set()
    out: set[Instance] = set()

    def rec(i: int) -> None:
        if i == s.p:
            t = tuple(val)
            if canonical_instance(t, auts) == t:
                out.add(t)
            return
        v = order[i]
        placed = [w for w in adj[v] if val[w] >= 0]
        cands = g.neighbors(val[placed[0]]) if placed else all_nodes
        for c in cands:
            if c in used or any(not g.has_edge(c, val[w]) for w in placed):
                continue
            val[v] = c
            used.add(c)
            rec(i + 1)
            used.discard(c)
            val[v] = -1

    rec(0)
    return sorted(out)


# ---------------------------------------------------------------- 2-paths


def _degree_order(g: DataGraph, order: NodeOrder | None) -> dict[int, int]:
    return (order or make_order(g, "degree-then-id")).rank(g.nodes)


def properly_ordered_2paths(g: DataGraph, order: NodeOrder | None = None) -> list[tuple[int, int, int]]:
    """Paths ``u - v - w`` whose midpoint precedes both ends.

    Each unordered end pair appears once per midpoint, written with
    ``u < w`` in the order.  The order defaults to degree-then-id.
    """
    rank = _degree_order(g, order)
    out = []
    for v in sorted(g.nodes, key=rank.__getitem__):
        later = sorted((u for u in g.neighbors(v) if rank[u] > rank[v]), key=rank.__getitem__)
        for i, u in enumerate(later):
            for w in later[i + 1:]:
                out.append((u, v, w))
    return out


def count_properly_ordered_2paths(g: DataGraph, order: NodeOrder | None = None) -> int:
    rank = _degree_order(g, order)
    total = 0
    for v in g.nodes:
        d = sum(1 for u in g.neighbors(v) if rank[u] > rank[v])
        total += d * (d - 1) // 2
    return total


# ---------------------------------------------------------------- OddCycle


def _triangles(g: DataGraph, order: NodeOrder | None) -> list[tuple[int, int, int]]:
    return [(v, u, w) for u, v, w in properly_ordered_2paths(g, order) if g.has_edge(u, w)]


def odd_cycle_enum(
    g: DataGraph, k: int, order: NodeOrder | None = None, stats: dict | None = None
) -> list[Instance]:
    """All cycles of length ``2k + 1``, each once.

    For ``k >= 2`` this follows OddCycle: every 2-path ``v_{2k+1} - v_1 -
    v_2`` with ``v_1 < v_2 < v_{2k+1}``, every set of ``k - 1`` node-disjoint
    edges avoiding those three nodes and lying entirely after ``v_1``, then
    every arrangement and orientation of the set.  ``k = 1`` closes 2-paths
    into triangles.  Cycles come back as ``(v_1, ..., v_{2k+1})`` made
    canonical for the cycle's symmetries.

    ``stats`` receives counts of 2-paths, edge sets examined and arrangements
    tried, which track the running time.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    p = 2 * k + 1
    auts = _cycle_auts(p)
    if k == 1:
        raw = _triangles(g, order)
        if stats is not None:
            stats.update(two_paths=count_properly_ordered_2paths(g, order), edge_sets=0, arrangements=0)
        return sorted(canonical_instance(t, auts) for t in raw)
    rank = _degree_order(g, order)
    edges = [(u, v) if rank[u] < rank[v] else (v, u) for u, v in g.sorted_edges()]
    edges.sort(key=lambda e: (rank[e[0]], rank[e[1]]))
    # edges whose smaller endpoint is after position r: suffix of the sorted list
    lows = [rank[e[0]] for e in edges]
    n_paths = n_sets = n_arr = 0
    out: list[Instance] = []
    slots = list(range(k - 1))
    for v2, v1, vlast in properly_ordered_2paths(g, order):
        n_paths += 1
        start = _first_after(lows, rank[v1])
        pool = [e for e in edges[start:] if v2 not in e and vlast not in e]
        for eset in itertools.combinations(pool, k - 1):
            nodes = [x for e in eset for x in e]
            if len(set(nodes)) != 2 * (k - 1):
                continue
            n_sets += 1
            for perm in itertools.permutations(slots):
                for bits in itertools.product((0, 1), repeat=k - 1):
                    n_arr += 1
                    seq = [v1, v2]
                    prev = v2
                    ok = True
                    for j, b in zip(perm, bits):
                        a, c = eset[j] if b == 0 else eset[j][::-1]
                        if not g.has_edge(prev, a):
                            ok = False
                            break
                        seq.extend((a, c))
                        prev = c
                    if ok and g.has_edge(prev, vlast):
                        seq.append(vlast)
                        out.append(canonical_instance(tuple(seq), auts))
    if stats is not None:
        stats.update(two_paths=n_paths, edge_sets=n_sets, arrangements=n_arr)
    return sorted(out)


def _first_after(lows: list[int], r: int) -> int:
    lo, hi = 0, len(lows)
    while lo < hi:
        mid = (lo + hi) // 2
        if lows[mid] <= r:
            lo = mid + 1
        else:
            hi = mid
    return lo


_CYCLE_AUTS: dict[int, list[tuple[int, ...]]] = {}


def _cycle_auts(p: int) -> list[tuple[int, ...]]:
    if p not in _CYCLE_AUTS:
        rots = [tuple((i + r) % p for i in range(p)) for r in range(p)]
        refl = [tuple((r - i) % p for i in range(p)) for r in range(p)]
        _CYCLE_AUTS[p] = rots + refl
    return _CYCLE_AUTS[p]


# ---------------------------------------------------------------- decomposition


PART_KINDS = ("isolated", "edge", "odd-hamiltonian", "component")


@dataclass(frozen=True)
class Decomposition:
    parts: tuple[tuple[tuple[int, ...], str], ...]
    cross_edges: tuple[tuple[int, int], ...] = ()

    @property
    def q(self) -> int:
        return sum(1 for _, kind in self.parts if kind == "isolated")

    def exponents(self, p: int) -> tuple[int, float]:
        """``(alpha, beta)`` of the composed algorithm."""
        q = self.q
        return q, (p - q) / 2

    def describe(self, names: Sequence[str]) -> str:
        return " + ".join(f"{kind}{{{','.join(names[v] for v in nodes)}}}" for nodes, kind in self.parts)


def hamilton_cycle(s: SampleGraph, nodes: Sequence[int]) -> tuple[int, ...] | None:
    """A Hamilton cycle of ``s`` restricted to ``nodes``, starting at the first."""
    nodes = list(nodes)
    if len(nodes) < 3:
        return None
    adj = s.adjacency()
    inside = set(nodes)
    path = [nodes[0]]
    seen = {nodes[0]}

    def rec() -> bool:
        if len(path) == len(nodes):
            return nodes[0] in adj[path[-1]]
        for w in sorted(adj[path[-1]] & inside):
            if w in seen:
                continue
            path.append(w)
            seen.add(w)
            if rec():
                return True
            path.pop()
            seen.discard(w)
        return False

    return tuple(path) if rec() else None


def _set_partitions(items: list[int]):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for sub in _set_partitions(rest):
        yield [[first]] + sub
        for i in range(len(sub)):
            yield sub[:i] + [[first] + sub[i]] + sub[i + 1:]


def decompose_sample(s: SampleGraph) -> Decomposition:
    """Isolated nodes, edges and odd-Hamiltonian blocks covering ``s``.

    Exhaustive over node partitions.  Fewest isolated nodes wins; ties go to
    the larger odd-Hamiltonian blocks, then to the first partition met.
    """
    if s.p > 10:
        raise StructuralError("decomposition search limited to p <= 10")
    es = s.edge_set()
    best, best_key = None, None
    for blocks in _set_partitions(list(range(s.p))):
        parts = []
        for blk in blocks:
            blk = sorted(blk)
            if len(blk) == 1:
                parts.append((tuple(blk), "isolated"))
            elif len(blk) == 2 and frozenset(blk) in es:
                parts.append((tuple(blk), "edge"))
            elif len(blk) % 2 == 1 and hamilton_cycle(s, blk) is not None:
                parts.append((tuple(blk), "odd-hamiltonian"))
            else:
                break
        else:
            q = sum(1 for _, k in parts if k == "isolated")
            odd = sorted((len(n) for n, k in parts if k == "odd-hamiltonian"), reverse=True)
            key = (q, [-x for x in odd])
            if best_key is None or key < best_key:
                best, best_key = parts, key
    assert best is not None
    return _with_cross(s, sorted(best))


def _with_cross(s: SampleGraph, parts) -> Decomposition:
    where = {v: i for i, (nodes, _) in enumerate(parts) for v in nodes}
    cross = tuple(e for e in s.edges if where[e[0]] != where[e[1]])
    return Decomposition(tuple(parts), cross)


# ---------------------------------------------------------------- parts


def _edge_instances(g: DataGraph) -> list[Instance]:
    return g.sorted_edges()


def _odd_hamiltonian_instances(g: DataGraph, sub: SampleGraph, order: NodeOrder | None) -> list[Instance]:
    """Instances of an odd-Hamiltonian sample: enumerate its Hamilton-length
    cycles, then test the chords in each of the ``2p`` placements."""
    p = sub.p
    ham = hamilton_cycle(sub, range(p))
    if ham is None:
        raise StructuralError("part has no Hamilton cycle")
    auts = automorphisms(sub)
    cycles = odd_cycle_enum(g, (p - 1) // 2, order)
    if len(sub.edges) == p:
        # no chords: each cycle is one instance
        return sorted({canonical_instance(tuple(cyc[ham.index(v)] for v in range(p)), auts) for cyc in cycles})
    out = set()
    for cyc in cycles:
        for mu in _cycle_auts(p):
            t = [0] * p
            for i in range(p):
                t[ham[i]] = cyc[mu[i]]
            if all(g.has_edge(t[a], t[b]) for a, b in sub.edges):
                out.add(canonical_instance(tuple(t), auts))
    return sorted(out)


def part_instances(g: DataGraph, s: SampleGraph, nodes: Sequence[int], kind: str,
                   order: NodeOrder | None = None) -> list[Instance]:
    """Instances of the subgraph of ``s`` induced by ``nodes``, local variable order."""
    sub, _ = s.induced(nodes)
    if kind == "isolated":
        return [(u,) for u in sorted(g.nodes)]
    if kind == "edge":
        return _edge_instances(g)
    if kind == "odd-hamiltonian":
        return _odd_hamiltonian_instances(g, sub, order)
    if kind == "component":
        return bounded_degree_enum(g, sub)
    raise ValueError(f"unknown part kind {kind!r}")


# ---------------------------------------------------------------- compose


def compose(
    parts_instances: Sequence[Iterable[Instance]],
    s: SampleGraph,
    d: Decomposition,
    g: DataGraph,
    order: NodeOrder | None = None,
) -> list[Instance]:
    """Join per-part instances into instances of ``s``.

    Every relabelling of each part instance by the part's automorphisms is
    tried.  A combination survives if its nodes are disjoint and every cross
    edge exists.  It is emitted only if its part-origin string (the part of
    each data node, nodes taken in the data order) is lexicographically first
    among all relabellings of the same instance by automorphisms of ``s``;
    among equal strings the smallest node tuple wins.
    """
    if len(parts_instances) != len(d.parts):
        raise ValueError("one instance set per part required")
    if len(d.parts) == 1:
        # a single part is already exactly-once
        nodes = d.parts[0][0]
        auts = automorphisms(s)
        out = set()
        for inst in parts_instances[0]:
            t = [0] * s.p
            for v, x in zip(nodes, inst):
                t[v] = x
            out.add(canonical_instance(tuple(t), auts))
        return sorted(out)
    rank = (order or make_order(g, "id")).rank(g.nodes)
    auts_s = automorphisms(s)
    p = s.p
    part_of = [0] * p
    for i, (nodes, _) in enumerate(d.parts):
        for v in nodes:
            part_of[v] = i
    expanded: list[list[tuple[int, ...]]] = []
    for (nodes, _), insts in zip(d.parts, parts_instances):
        sub, _ = s.induced(nodes)
        auts = automorphisms(sub)
        seen = set()
        for t in insts:
            for mu in auts:
                seen.add(tuple(t[mu[i]] for i in range(len(nodes))))
        expanded.append(sorted(seen))
        if not seen:
            return []
    # cross edges checked as soon as both ends are placed
    placed_after = {}
    for a, b in d.cross_edges:
        placed_after.setdefault(max(part_of[a], part_of[b]), []).append((a, b))

    val = [-1] * p
    used: set[int] = set()
    out: list[Instance] = []

    # relabelling t by mu puts sample node mu^-1(v) where t had v
    relabel = []
    for mu in auts_s:
        inv = [0] * p
        for j in range(p):
            inv[mu[j]] = j
        relabel.append((mu, [part_of[inv[v]] for v in range(p)]))

    def first(t: tuple[int, ...]) -> bool:
        slots = sorted(range(p), key=lambda v: rank[t[v]])
        mine = tuple(part_of[v] for v in slots)
        for mu, parts in relabel:
            theirs = tuple(parts[v] for v in slots)
            if theirs < mine:
                return False
            if theirs == mine and tuple(t[mu[j]] for j in range(p)) < t:
                return False
        return True

    def rec(i: int) -> None:
        if i == len(d.parts):
            t = tuple(val)
            if first(t):
                out.append(canonical_instance(t, auts_s))
            return
        nodes = d.parts[i][0]
        checks = placed_after.get(i, ())
        for inst in expanded[i]:
            if any(x in used for x in inst):
                continue
            for v, x in zip(nodes, inst):
                val[v] = x
            if all(g.has_edge(val[a], val[b]) for a, b in checks):
                used.update(inst)
                rec(i + 1)
                used.difference_update(inst)
        for v in nodes:
            val[v] = -1

    rec(0)
    return sorted(out)


# ---------------------------------------------------------------- bounded degree


def articulation_points(s: SampleGraph, nodes: Sequence[int] | None = None) -> set[int]:
    nodes = list(range(s.p)) if nodes is None else list(nodes)
    base = _n_components(s, nodes)
    return {v for v in nodes if len(nodes) > 1 and _n_components(s, [x for x in nodes if x != v]) > base}


def _n_components(s: SampleGraph, nodes: Sequence[int]) -> int:
    sub, _ = s.induced(nodes)
    return len(sub.components()) if nodes else 0


def bounded_degree_enum(g: DataGraph, s: SampleGraph, stats: dict | None = None) -> list[Instance]:
    """Grow instances one sample node at a time.

    Peels the highest-index node whose removal keeps ``s`` connected,
    enumerates the rest recursively, then extends through one sample neighbour
    ``v`` of the peeled node by scanning the data neighbours of ``v``'s image.
    """
    if s.p >= 2 and not s.is_connected():
        raise StructuralError("bounded-degree enumeration needs a connected sample; decompose first")
    auts = automorphisms(s)
    if s.p == 1:
        return [(u,) for u in sorted(g.nodes)]
    if s.p == 2:
        return sorted(canonical_instance(e, auts) for e in g.sorted_edges())
    cut = articulation_points(s)
    u = max(v for v in range(s.p) if v not in cut)
    rest = [x for x in range(s.p) if x != u]
    sub, _ = s.induced(rest)
    sub_auts = automorphisms(sub)
    adj = s.adjacency()
    v = min(adj[u])
    v_local = rest.index(v)
    u_nbrs = sorted(adj[u])
    out = []
    tried = 0
    for inst in bounded_degree_enum(g, sub):
        for mu in sub_auts:
            img = [inst[mu[i]] for i in range(len(rest))]
            used = set(img)
            t = [0] * s.p
            for x, y in zip(rest, img):
                t[x] = y
            for c in g.neighbors(img[v_local]):
                tried += 1
                if c in used:
                    continue
                t[u] = c
                if all(g.has_edge(c, t[w]) for w in u_nbrs):
                    tt = tuple(t)
                    if canonical_instance(tt, auts) == tt:
                        out.append(tt)
    if stats is not None:
        stats["extensions_tried"] = stats.get("extensions_tried", 0) + tried
    return sorted(out)


# ---------------------------------------------------------------- dispatcher


def enumerate_general(g: DataGraph, s: SampleGraph, degree_hint: int | None = None,
                      order: NodeOrder | None = None) -> list[Instance]:
    """Bounded-degree growth when the maximum degree is at most ``sqrt(m)``,
    otherwise decomposition, per-part enumeration and composition."""
    if any(True for _ in s.edges) and g.edge_count == 0:
        return []
    delta = g.max_degree() if degree_hint is None else degree_hint
    comps = s.components()
    if s.p >= 2 and delta <= math.sqrt(g.edge_count):
        if len(comps) == 1:
            return bounded_degree_enum(g, s)
        d = _with_cross(s, [(tuple(c), "component") for c in comps])
    else:
        d = decompose_sample(s)
    insts = [part_instances(g, s, nodes, kind, order) for nodes, kind in d.parts]
    return compose(insts, s, d, g)
