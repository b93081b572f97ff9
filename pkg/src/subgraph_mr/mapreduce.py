"""Single-round map-reduce simulation with exact communication accounting.

The map phase turns every data edge into key-value pairs; the shuffle groups
them by key; each reducer evaluates the CQs on the edges it received.
Reducers share nothing, so running them in any order gives the same output.
"""

from __future__ import annotations

import itertools
import json
import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from math import comb, prod
from operator import itemgetter
from typing import Callable, Iterable, Sequence

from .cq import ConjunctiveQuery, CQSet, Relation, evaluate_cq
from .graph import DataGraph, NodeOrder, bucket_map, make_order
from .planner import ShareAssignment, StructuralError

log = logging.getLogger(__name__)

SCHEMES = ("partition", "multiway", "bucket-ordered", "variable-oriented")

Shuffle = dict  # key -> list of (u, v, role)

_endpoints = itemgetter(0, 1)


@dataclass
class CostReport:
    scheme: str
    seed: int
    params: dict
    edge_count: int
    key_value_pairs_emitted: int
    raw_pairs: int
    distinct_reducers_used: int
    per_edge_replication: float
    predicted_pairs: int | None
    reducer_edge_histogram: dict = field(default_factory=dict)
    instances_found: int = 0
    reducer_work_proxy: float = 0.0
    max_reducer_edges: int = 0

    @property
    def replication_exact(self) -> Fraction:
        return Fraction(self.key_value_pairs_emitted, self.edge_count) if self.edge_count else Fraction(0)

    def to_json(self) -> dict:
        d = asdict(self)
        d["reducer_edge_histogram"] = {str(k): v for k, v in sorted(self.reducer_edge_histogram.items())}
        return d

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)


# ---------------------------------------------------------------- mappers


def _oriented_edges(g: DataGraph, rank) -> list[tuple[int, int]]:
    return [(u, v) if rank(u) < rank(v) else (v, u) for u, v in g.sorted_edges()]


def map_partition(g: DataGraph, b: int, seed: int = 0, p: int = 3) -> Shuffle:
    """Reducers are ``p``-subsets of ``b`` node groups; an edge goes to every
    subset holding both endpoint groups."""
    if b < p or p < 2:
        raise ValueError(f"partition needs b >= p >= 2 (got b={b}, p={p})")
    grp = bucket_map(g.nodes, b, seed)
    memo: dict[tuple[int, int], list[tuple[int, ...]]] = {}
    out: Shuffle = {}
    for u, v in g.sorted_edges():
        gu, gv = grp[u], grp[v]
        pair = (min(gu, gv), max(gu, gv))
        keys = memo.get(pair)
        if keys is None:
            base = set(pair)
            rest = [x for x in range(1, b + 1) if x not in base]
            keys = [tuple(sorted(base | set(c))) for c in itertools.combinations(rest, p - len(base))]
            memo[pair] = keys
        val = (u, v, -1)
        for key in keys:
            out.setdefault(key, []).append(val)
    return out


def map_multiway_triangle(g: DataGraph, b: int, seed: int = 0, cq: ConjunctiveQuery | None = None) -> Shuffle:
    """Ordered bucket triples; an edge ``(u, v)``, ``u < v`` by id, is sent once
    per subgoal role with the third coordinate free.  Values carry the role."""
    if b < 1:
        raise ValueError("b must be >= 1")
    subgoals = cq.subgoals if cq is not None else ((0, 1), (1, 2), (0, 2))
    if len({x for sg in subgoals for x in sg}) != 3:
        raise StructuralError("multiway scheme needs a 3-variable CQ")
    h = bucket_map(g.nodes, b, seed)
    out: Shuffle = {}
    for u, v in g.sorted_edges():
        hu, hv = h[u], h[v]
        for role, (a, c) in enumerate(subgoals):
            free = 3 - a - c
            key = [0, 0, 0]
            key[a], key[c] = hu, hv
            for z in range(1, b + 1):
                key[free] = z
                out.setdefault(tuple(key), []).append((u, v, role))
    return out


def map_bucket_ordered(g: DataGraph, b: int, p: int, seed: int = 0) -> Shuffle:
    """Nondecreasing length-``p`` bucket lists containing ``h(u)`` and ``h(v)``."""
    if b < 1 or p < 2:
        raise ValueError("need b >= 1 and p >= 2")
    h = bucket_map(g.nodes, b, seed)
    fill = list(itertools.combinations_with_replacement(range(1, b + 1), p - 2))
    memo: dict[tuple[int, int], list[tuple[int, ...]]] = {}
    out: Shuffle = {}
    for u, v in g.sorted_edges():
        hu, hv = h[u], h[v]
        # orient by (bucket, id) so reducers see E in the bucket-then-id order
        if (hu, u) > (hv, v):
            u, v, hu, hv = v, u, hv, hu
        pair = (min(hu, hv), max(hu, hv))
        keys = memo.get(pair)
        if keys is None:
            keys = [tuple(sorted(pair + c)) for c in fill]
            memo[pair] = keys
        val = (u, v, -1)
        for key in keys:
            out.setdefault(key, []).append(val)
    return out


def _integer_shares(shares) -> list[int]:
    vals = shares.shares if isinstance(shares, ShareAssignment) else shares
    ints = [int(round(x)) for x in vals]
    if any(x < 1 for x in ints) or any(abs(x - y) > 1e-9 for x, y in zip(ints, vals)):
        raise ValueError("variable-oriented mapping needs integer shares >= 1; round the plan first")
    return ints


def map_variable_oriented(
    g: DataGraph,
    cqs: CQSet | Sequence[ConjunctiveQuery],
    shares,
    seed: int = 0,
    order: NodeOrder | None = None,
) -> Shuffle:
    """One slot per CQ variable.  For subgoal ``E(A, B)`` an oriented edge
    ``(u, v)`` goes to every key with ``A``-slot ``h_A(u)`` and ``B``-slot
    ``h_B(v)``.  A subgoal used in both orientations sends both copies."""
    queries = list(cqs)
    ints = _integer_shares(shares)
    p = queries[0].p
    if len(ints) != p:
        raise ValueError("one share per variable required")
    order = order or make_order(g, "id")
    rank = order.rank(g.nodes)
    slots = [bucket_map(g.nodes, s, seed) for s in ints]
    roles = sorted({(i, sg) for q in queries for i, sg in enumerate(q.subgoals)})
    free_ranges = {}
    for i, (a, c) in roles:
        others = [x for x in range(p) if x not in (a, c)]
        free_ranges[(i, (a, c))] = (others, list(itertools.product(*[range(1, ints[x] + 1) for x in others])))
    out: Shuffle = {}
    for u, v in g.sorted_edges():
        if rank[u] > rank[v]:
            u, v = v, u
        for role in roles:
            i, (a, c) = role
            others, combos = free_ranges[role]
            key = [0] * p
            key[a], key[c] = slots[a][u], slots[c][v]
            val = (u, v, role)
            for combo in combos:
                for x, z in zip(others, combo):
                    key[x] = z
                out.setdefault(tuple(key), []).append(val)
    return out


def variable_oriented_pairs_per_edge(cqs, shares: Sequence[int]) -> int:
    """Pairs each edge produces: for every subgoal orientation in use, the
    product of the shares of the variables outside that subgoal.

    Equals the variable-oriented cost expression when dominated variables
    have share 1; otherwise their shares count too.
    """
    queries = list(cqs)
    roles = {(i, sg) for q in queries for i, sg in enumerate(q.subgoals)}
    p = queries[0].p
    return sum(prod(shares[x] for x in range(p) if x not in sg) for _, sg in roles)


# ---------------------------------------------------------------- reducers


def _partition_owner(groups: Iterable[int], b: int, p: int) -> tuple[int, ...]:
    """Smallest ``p``-subset of ``1..b`` containing the given groups."""
    base = set(groups)
    extra = [x for x in range(1, b + 1) if x not in base][: p - len(base)]
    return tuple(sorted(base | set(extra)))


def reduce_evaluate(
    key,
    values: Sequence[tuple[int, int, object]],
    cqs: Sequence[ConjunctiveQuery],
    rank: dict,
    per_role: bool = False,
    keep: Callable[[tuple, tuple[int, ...]], bool] | None = None,
) -> list[tuple[int, tuple[int, ...]]]:
    """Evaluate every CQ on one reducer's edges.

    With ``per_role`` the values are split by their role tag: an integer
    names a subgoal position, a ``(i, (a, b))`` tag a subgoal position and
    orientation.  ``keep`` filters instances this reducer is not responsible
    for.
    """
    if not values:
        return []
    out = []
    if per_role:
        split: dict[object, list[tuple[int, int]]] = {}
        for u, v, role in values:
            split.setdefault(role, []).append((u, v))
        rels = {role: Relation(ps) for role, ps in split.items()}
        empty = Relation()
    else:
        shared = Relation(map(_endpoints, values))
    for qi, q in enumerate(cqs):
        if per_role:
            rl = [rels.get(i if (i in rels) else (i, sg), empty) for i, sg in enumerate(q.subgoals)]
        else:
            rl = shared
        for t in evaluate_cq(q, rl, rank):
            if keep is None or keep(key, t):
                out.append((qi, t))
    return out


# ---------------------------------------------------------------- round


def _report(scheme, seed, params, g, shuffle, collapse, predicted) -> CostReport:
    raw = sum(len(vs) for vs in shuffle.values())
    per_key = {}
    for key, vs in shuffle.items():
        per_key[key] = len(set(map(_endpoints, vs))) if collapse else len(vs)
    emitted = sum(per_key.values())
    hist = Counter(per_key.values())
    m = g.edge_count
    return CostReport(
        scheme=scheme,
        seed=seed,
        params=params,
        edge_count=m,
        key_value_pairs_emitted=emitted,
        raw_pairs=raw,
        distinct_reducers_used=sum(1 for x in per_key.values() if x),
        per_edge_replication=emitted / m if m else 0.0,
        predicted_pairs=predicted,
        reducer_edge_histogram=dict(hist),
        reducer_work_proxy=float(sum(x ** 1.5 for x in per_key.values())),
        max_reducer_edges=max(per_key.values(), default=0),
    )


def predicted_partition_pairs(g: DataGraph, b: int, p: int, seed: int = 0) -> int:
    grp = bucket_map(g.nodes, b, seed)
    same = sum(1 for u, v in g.edges if grp[u] == grp[v])
    return same * comb(b - 1, p - 1) + (g.edge_count - same) * comb(b - 2, p - 2)


def run_round(
    g: DataGraph,
    scheme: str,
    cqs: CQSet | Sequence[ConjunctiveQuery],
    b: int | None = None,
    shares=None,
    seed: int = 0,
    evaluate: bool = True,
    threads: int = 1,
) -> tuple[list[tuple[int, tuple[int, ...]]], CostReport]:
    """Map, shuffle and reduce once.

    Returns ``(instances, report)`` where instances are ``(cq index, node
    tuple)`` in reducer-key order.  ``evaluate=False`` does the accounting
    only.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    queries = list(cqs)
    if not queries:
        raise ValueError("no queries")
    p = queries[0].p
    if any(not any(x in sg for sg in queries[0].subgoals) for x in range(p)):
        raise StructuralError("map-reduce schemes need a sample without isolated nodes")
    collapse = False
    per_role = False
    keep = None
    if scheme == "partition":
        if b is None or b < max(3, p):
            raise ValueError(f"partition needs b >= {max(3, p)}")
        shuffle = map_partition(g, b, seed, p)
        rank = make_order(g, "id").rank(g.nodes)
        grp = bucket_map(g.nodes, b, seed)
        keep = lambda key, t: _partition_owner((grp[x] for x in t), b, p) == key  # noqa: E731
        predicted = predicted_partition_pairs(g, b, p, seed)
        params = {"b": b, "p": p}
    elif scheme == "multiway":
        if p != 3 or len(queries) != 1:
            raise StructuralError("multiway scheme evaluates a single 3-variable CQ (the triangle)")
        if b is None or b < 1:
            raise ValueError("multiway needs b >= 1")
        shuffle = map_multiway_triangle(g, b, seed, queries[0])
        rank = make_order(g, "id").rank(g.nodes)
        collapse = True
        # a triangle belongs to the reducer addressed by its own buckets
        h = bucket_map(g.nodes, b, seed)
        keep = lambda key, t: tuple(h[x] for x in t) == key  # noqa: E731
        predicted = (3 * b - 2) * g.edge_count
        params = {"b": b, "raw_per_edge": 3 * b}
    elif scheme == "bucket-ordered":
        if b is None or b < 1:
            raise ValueError("bucket-ordered needs b >= 1")
        shuffle = map_bucket_ordered(g, b, p, seed)
        order = make_order(g, "bucket-then-id", b, seed)
        rank = order.rank(g.nodes)
        h = bucket_map(g.nodes, b, seed)
        keep = lambda key, t: tuple(sorted(h[x] for x in t)) == key  # noqa: E731
        predicted = comb(b + p - 3, p - 2) * g.edge_count
        params = {"b": b, "p": p}
    else:
        if shares is None:
            raise ValueError("variable-oriented needs shares")
        ints = _integer_shares(shares)
        shuffle = map_variable_oriented(g, queries, ints, seed)
        rank = make_order(g, "id").rank(g.nodes)
        per_role = True
        predicted = variable_oriented_pairs_per_edge(queries, ints) * g.edge_count
        params = {"shares": dict(zip(queries[0].names, ints)), "reducers": prod(ints)}
    report = _report(scheme, seed, params, g, shuffle, collapse, predicted)
    instances: list[tuple[int, tuple[int, ...]]] = []
    if evaluate:
        keys = sorted(shuffle)

        def task(key):
            return reduce_evaluate(key, shuffle[key], queries, rank, per_role, keep)

        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as ex:
                results = list(ex.map(task, keys))
        else:
            results = [task(k) for k in keys]
        for r in results:
            instances.extend(r)
        report.instances_found = len(instances)
    return instances, report
