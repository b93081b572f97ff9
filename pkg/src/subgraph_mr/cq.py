"""Conjunctive queries for sample graphs.

A CQ over an edge relation ``E`` has one subgoal per sample edge, with the
argument order fixing the edge's orientation, plus an arithmetic condition.
The condition is kept in disjunctive normal form: a tuple of disjuncts, each
a tuple of atoms ``("<", a, b)`` or ``("!=", a, b)`` over variable indices.
"""

from __future__ import annotations

import itertools
import json
from collections import defaultdict
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Mapping, Sequence

from .graph import SampleGraph

MAX_SAMPLE_NODES = 10

Atom = tuple  # (op, a, b)
Disjunct = tuple  # tuple of atoms
Ordering = tuple  # variable indices, smallest first


class SampleTooLargeError(ValueError):
    pass


# ---------------------------------------------------------------- queries


@dataclass(frozen=True)
class ConjunctiveQuery:
    names: tuple[str, ...]
    subgoals: tuple[tuple[int, int], ...]
    condition: tuple[Disjunct, ...] = ((),)

    @property
    def p(self) -> int:
        return len(self.names)

    def is_conjunctive(self) -> bool:
        return len(self.condition) == 1

    def variables_of(self, i: int) -> tuple[int, int]:
        return self.subgoals[i]

    def orientation_atoms(self) -> tuple[Atom, ...]:
        return tuple(("<", a, b) for a, b in self.subgoals)

    def accepts_ranks(self, ranks: Sequence[int]) -> bool:
        """Does the condition hold when variable ``i`` has rank ``ranks[i]``?"""
        return any(all(_atom_holds(at, ranks) for at in d) for d in self.condition)

    def accepts_with_orientation(self, ranks: Sequence[int]) -> bool:
        if any(ranks[a] >= ranks[b] for a, b in self.subgoals):
            return False
        return self.accepts_ranks(ranks)

    def is_satisfiable(self) -> bool:
        """Every disjunct's strict part is acyclic."""
        return all(_acyclic(self.p, [(a, b) for op, a, b in d if op == "<"]) for d in self.condition)

    def render(self) -> str:
        n = self.names
        parts = [f"E({n[a]},{n[b]})" for a, b in self.subgoals]
        cond = [d for d in self.condition if d]
        if len(self.condition) == 1:
            parts.extend(_render_atom(at, n) for at in self.condition[0])
        elif cond:
            parts.append(" | ".join("(" + " & ".join(_render_atom(at, n) for at in d) + ")" for d in cond))
        return " & ".join(parts)

    __str__ = render

    def to_json(self) -> dict:
        n = self.names
        return {
            "variables": list(n),
            "subgoals": [[n[a], n[b]] for a, b in self.subgoals],
            "condition": [[[op, n[a], n[b]] for op, a, b in d] for d in self.condition],
        }


def _render_atom(at: Atom, names: Sequence[str]) -> str:
    op, a, b = at
    return f"{names[a]}{op}{names[b]}"


def _atom_holds(at: Atom, ranks: Sequence[int]) -> bool:
    op, a, b = at
    if op == "<":
        return ranks[a] < ranks[b]
    return ranks[a] != ranks[b]


def _acyclic(p: int, arcs: Iterable[tuple[int, int]]) -> bool:
    indeg = [0] * p
    out: list[list[int]] = [[] for _ in range(p)]
    for a, b in arcs:
        out[a].append(b)
        indeg[b] += 1
    stack = [v for v in range(p) if indeg[v] == 0]
    seen = 0
    while stack:
        v = stack.pop()
        seen += 1
        for w in out[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                stack.append(w)
    return seen == p


def parse_condition_json(cond, names: Sequence[str]) -> tuple[Disjunct, ...]:
    idx = {nm: i for i, nm in enumerate(names)}
    return tuple(tuple((op, idx[a], idx[b]) for op, a, b in d) for d in cond)


def cq_from_json(obj: Mapping) -> ConjunctiveQuery:
    names = tuple(obj["variables"])
    idx = {nm: i for i, nm in enumerate(names)}
    subgoals = tuple((idx[a], idx[b]) for a, b in obj["subgoals"])
    return ConjunctiveQuery(names, subgoals, parse_condition_json(obj["condition"], names))


@dataclass(frozen=True)
class CQSet:
    sample: SampleGraph
    queries: tuple[ConjunctiveQuery, ...]
    provenance: tuple[tuple, ...] = field(default=())

    def __len__(self) -> int:
        return len(self.queries)

    def __iter__(self) -> Iterator[ConjunctiveQuery]:
        return iter(self.queries)

    def __getitem__(self, i: int) -> ConjunctiveQuery:
        return self.queries[i]

    def render(self) -> str:
        return "\n".join(f"{i + 1}. {q.render()}" for i, q in enumerate(self.queries))

    def to_json(self) -> dict:
        return {
            "variables": list(self.sample.names),
            "count": len(self.queries),
            "queries": [q.to_json() for q in self.queries],
            "provenance": [[_prov_json(x, self.sample.names) for x in pv] for pv in self.provenance],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


def _prov_json(x, names):
    if isinstance(x, tuple):
        return [names[i] for i in x]
    return x


# ---------------------------------------------------------------- automorphisms


def _check_size(s: SampleGraph) -> None:
    if s.p > MAX_SAMPLE_NODES:
        raise SampleTooLargeError(f"sample graph has {s.p} nodes; at most {MAX_SAMPLE_NODES} supported")


def automorphisms(s: SampleGraph) -> list[tuple[int, ...]]:
    """All edge-preserving permutations of the sample's nodes.

    ``mu[i]`` is the image of node ``i``.  Found by backtracking that assigns
    images in index order and checks adjacency against earlier nodes.
    """
    _check_size(s)
    p = s.p
    adj = s.adjacency()
    deg = [len(a) for a in adj]
    img = [-1] * p
    used = [False] * p
    out: list[tuple[int, ...]] = []

    def place(i: int) -> None:
        if i == p:
            out.append(tuple(img))
            return
        for c in range(p):
            if used[c] or deg[c] != deg[i]:
                continue
            if any((j in adj[i]) != (img[j] in adj[c]) for j in range(i)):
                continue
            img[i] = c
            used[c] = True
            place(i + 1)
            used[c] = False
        img[i] = -1

    place(0)
    return out


def apply_to_ordering(mu: Sequence[int], o: Ordering) -> Ordering:
    return tuple(mu[x] for x in o)


def coset_representatives(s: SampleGraph, auts: list | None = None) -> list[Ordering]:
    """One ordering per class ``{mu . o}``, the lexicographic minimum.

    Orderings are compared as rank vectors ``(rank of var 0, rank of var 1,
    ...)``.  So the representative puts the first variable as low as its
    class allows, then the second, and so on.  For a pentagon this yields
    ``X1`` smallest with ``X2 < X5``.  Output follows rank-vector order.
    """
    _check_size(s)
    auts = automorphisms(s) if auts is None else auts
    seen: set[tuple[int, ...]] = set()
    reps = []
    # permutations() is lexicographic, so the first member of a class met is its minimum
    for r in itertools.permutations(range(s.p)):
        if r in seen:
            continue
        reps.append(_ordering_from_ranks(r))
        for mu in auts:
            seen.add(tuple(r[mu[v]] for v in range(s.p)))
    return reps


def _ordering_from_ranks(r: Sequence[int]) -> Ordering:
    o = [0] * len(r)
    for v, k in enumerate(r):
        o[k] = v
    return tuple(o)


def chain_condition(o: Ordering) -> Disjunct:
    return tuple(("<", o[i], o[i + 1]) for i in range(len(o) - 1))


def cq_from_ordering(s: SampleGraph, o: Ordering) -> ConjunctiveQuery:
    if sorted(o) != list(range(s.p)):
        raise ValueError(f"{o!r} is not an ordering of {s.p} variables")
    pos = {v: i for i, v in enumerate(o)}
    subgoals = tuple((a, b) if pos[a] < pos[b] else (b, a) for a, b in s.edges)
    return ConjunctiveQuery(s.names, subgoals, (chain_condition(o),))


# ---------------------------------------------------------------- grouping


def linear_extensions(p: int, arcs: Iterable[tuple[int, int]]) -> Iterator[Ordering]:
    """All orderings of ``range(p)`` consistent with the arcs ``a < b``."""
    preds = [0] * p
    out: list[list[int]] = [[] for _ in range(p)]
    for a, b in set(arcs):
        out[a].append(b)
        preds[b] += 1
    cur: list[int] = []
    placed = [False] * p

    def rec():
        if len(cur) == p:
            yield tuple(cur)
            return
        for v in range(p):
            if placed[v] or preds[v]:
                continue
            placed[v] = True
            cur.append(v)
            for w in out[v]:
                preds[w] -= 1
            yield from rec()
            for w in out[v]:
                preds[w] += 1
            cur.pop()
            placed[v] = False

    yield from rec()


def _ranks(o: Ordering) -> list[int]:
    r = [0] * len(o)
    for i, v in enumerate(o):
        r[v] = i
    return r


def accepted_orderings(cq: ConjunctiveQuery) -> set[Ordering]:
    """Orderings of the variables that the subgoal orientation plus condition admit."""
    return {o for o in linear_extensions(cq.p, cq.subgoals) if cq.accepts_ranks(_ranks(o))}


def _swap_rule(chains: list[Ordering]) -> Disjunct | None:
    if len(chains) != 2:
        return None
    a, b = chains
    diff = [i for i in range(len(a)) if a[i] != b[i]]
    if len(diff) != 2 or diff[1] != diff[0] + 1:
        return None
    i = diff[0]
    if not (a[i] == b[i + 1] and a[i + 1] == b[i]):
        return None
    atoms = list(chain_condition(a))
    atoms[i] = ("!=", a[i], a[i + 1])
    return tuple(atoms)


def _factor_rule(chains: list[Ordering], p: int) -> Disjunct:
    poss = [_ranks(o) for o in chains]
    common = {(x, y) for x in range(p) for y in range(p) if x != y and all(r[x] < r[y] for r in poss)}
    reduced = {
        (x, y) for (x, y) in common
        if not any((x, z) in common and (z, y) in common for z in range(p))
    }
    atoms = [("<", x, y) for x, y in sorted(reduced)]
    for x, y in itertools.combinations(range(p), 2):
        if (x, y) not in common and (y, x) not in common:
            atoms.append(("!=", x, y))
    return tuple(atoms)


def merge_group(s_names: tuple[str, ...], subgoals, chains: list[Ordering]) -> ConjunctiveQuery:
    """One CQ equivalent to the OR of the chain CQs sharing ``subgoals``."""
    p = len(s_names)
    target = set(chains)
    if len(chains) == 1:
        return ConjunctiveQuery(s_names, subgoals, (chain_condition(chains[0]),))
    candidates = []
    swapped = _swap_rule(chains)
    if swapped is not None:
        candidates.append(swapped)
    candidates.append(_factor_rule(chains, p))
    for cond in candidates:
        q = ConjunctiveQuery(s_names, subgoals, (cond,))
        if accepted_orderings(q) == target:
            return q
    return ConjunctiveQuery(s_names, subgoals, tuple(chain_condition(o) for o in chains))


def group_by_orientation(
    cqs: Sequence[ConjunctiveQuery], sources: Sequence[Ordering] | None = None
) -> tuple[list[ConjunctiveQuery], list[tuple[Ordering, ...]]]:
    """Merge chain CQs with identical subgoal lists.

    Groups keep the order of their first member.  When ``sources`` is omitted
    each input must carry a single chain condition, from which the ordering is
    read back.
    """
    if not cqs:
        return [], []
    names = cqs[0].names
    if sources is None:
        sources = [_ordering_of_chain(q) for q in cqs]
    groups: dict[tuple, list[Ordering]] = {}
    for q, o in zip(cqs, sources):
        if q.names != names:
            raise ValueError("all queries must share one sample graph")
        groups.setdefault(q.subgoals, []).append(o)
    merged = [merge_group(names, sg, chains) for sg, chains in groups.items()]
    return merged, [tuple(c) for c in groups.values()]


def _ordering_of_chain(q: ConjunctiveQuery) -> Ordering:
    if len(q.condition) != 1:
        raise ValueError("expected a single chain condition")
    atoms = q.condition[0]
    if len(atoms) != q.p - 1 or any(op != "<" for op, _, _ in atoms):
        raise ValueError("expected a single chain condition")
    o = [atoms[0][1]] + [b for _, _, b in atoms]
    if any(atoms[i][2] != atoms[i + 1][1] for i in range(len(atoms) - 1)) or sorted(o) != list(range(q.p)):
        raise ValueError("condition is not a chain")
    return tuple(o)


def generate_cqs(s: SampleGraph) -> CQSet:
    """Coset representatives, one chain CQ each, merged by orientation."""
    _check_size(s)
    if s.p == 1:
        return CQSet(s, (ConjunctiveQuery(s.names, (), ((),)),), (((0,),),))
    reps = coset_representatives(s)
    chains = [cq_from_ordering(s, o) for o in reps]
    merged, prov = group_by_orientation(chains, reps)
    return CQSet(s, tuple(merged), tuple(prov))


# ---------------------------------------------------------------- evaluation


class Relation:
    """Binary relation with forward and backward adjacency, each built on first use."""

    __slots__ = ("pairs", "_fwd", "_bwd")

    def __init__(self, pairs: Iterable[tuple[int, int]] = ()):
        self.pairs: set[tuple[int, int]] = set(pairs)
        self._fwd: dict[int, list[int]] | None = None
        self._bwd: dict[int, list[int]] | None = None

    @property
    def fwd(self) -> dict[int, list[int]]:
        if self._fwd is None:
            idx: dict[int, list[int]] = defaultdict(list)
            for u, v in self.pairs:
                idx[u].append(v)
            self._fwd = dict(idx)
        return self._fwd

    @property
    def bwd(self) -> dict[int, list[int]]:
        if self._bwd is None:
            idx: dict[int, list[int]] = defaultdict(list)
            for u, v in self.pairs:
                idx[v].append(u)
            self._bwd = dict(idx)
        return self._bwd

    def add(self, u: int, v: int) -> None:
        if (u, v) in self.pairs:
            return
        self.pairs.add((u, v))
        if self._fwd is not None:
            self._fwd.setdefault(u, []).append(v)
        if self._bwd is not None:
            self._bwd.setdefault(v, []).append(u)

    def __len__(self) -> int:
        return len(self.pairs)

    def __contains__(self, uv) -> bool:
        return uv in self.pairs


def oriented_relation(edges: Iterable[tuple[int, int]], rank: Mapping[int, int]) -> Relation:
    """``E`` holding each undirected edge once, smaller endpoint first."""
    rel = Relation()
    for u, v in edges:
        if rank[u] < rank[v]:
            rel.add(u, v)
        else:
            rel.add(v, u)
    return rel


def _other(sg: tuple[int, int], v: int) -> int:
    return sg[1] if sg[0] == v else sg[0]


def _plan_order(q: ConjunctiveQuery) -> list[int]:
    p = q.p
    inc: list[list[int]] = [[] for _ in range(p)]
    for i, (a, b) in enumerate(q.subgoals):
        inc[a].append(i)
        inc[b].append(i)
    order: list[int] = []
    placed = [False] * p
    while len(order) < p:
        best, best_key = -1, None
        for v in range(p):
            if placed[v]:
                continue
            links = sum(1 for i in inc[v] if placed[_other(q.subgoals[i], v)])
            key = (links, len(inc[v]), -v)
            if best_key is None or key > best_key:
                best, best_key = v, key
        placed[best] = True
        order.append(best)
    return order


def evaluate_cq(
    q: ConjunctiveQuery,
    relations: Relation | Sequence[Relation],
    rank: Mapping[int, int],
    domain: Iterable[int] | None = None,
) -> list[tuple[int, ...]]:
    """All injective assignments satisfying every subgoal and the condition.

    ``relations`` is either one relation used for every subgoal or one per
    subgoal.  ``rank`` maps nodes to their position in the node order and is
    what ``<`` in the condition compares.  Variables with no subgoal range
    over ``domain`` (default: every ranked node).
    """
    p = q.p
    rels = [relations] * len(q.subgoals) if isinstance(relations, Relation) else list(relations)
    if len(rels) != len(q.subgoals):
        raise ValueError("need one relation per subgoal")
    if any(len(r) == 0 for r in rels):
        return []
    if p == 0:
        return [()]
    order = _plan_order(q)
    step = {v: i for i, v in enumerate(order)}

    # per step: subgoal checks linking to earlier variables
    links: list[list[tuple[int, int, bool]]] = [[] for _ in range(p)]
    for gi, (a, b) in enumerate(q.subgoals):
        if step[a] < step[b]:
            links[step[b]].append((gi, a, True))  # b's value among fwd[val a]
        else:
            links[step[a]].append((gi, b, False))  # a's value among bwd[val b]
    # per step and disjunct: atoms that become decidable
    nd = len(q.condition)
    checks: list[list[list[Atom]]] = [[[] for _ in range(nd)] for _ in range(p)]
    for di, d in enumerate(q.condition):
        for at in d:
            _, a, b = at
            checks[max(step[a], step[b])][di].append(at)
    seeds: list[list[int] | None] = [None] * p
    for i, v in enumerate(order):
        if links[i]:
            continue
        own = [gi for gi, (a, b) in enumerate(q.subgoals) if v in (a, b)]
        if own:
            gi = own[0]
            a, b = q.subgoals[gi]
            src = rels[gi].fwd if a == v else rels[gi].bwd
            seeds[i] = sorted(src, key=rank.__getitem__)
        else:
            dom = rank.keys() if domain is None else domain
            seeds[i] = sorted(dom, key=rank.__getitem__)

    val = [0] * p
    rk = [0] * p
    used: set[int] = set()
    out: list[tuple[int, ...]] = []
    # per step: (fwd-or-bwd index, membership set, earlier variable)
    probe = [[((rels[gi].fwd if fw else rels[gi].bwd), rels[gi].pairs, other, fw) for gi, other, fw in links[i]]
             for i in range(p)]
    has_checks = [any(ck) for ck in checks]
    # indexes a value must appear in for some later step to have candidates
    need = [[index for j in range(i + 1, p) for index, _, other, _ in probe[j] if other == order[i]]
            for i in range(p)]
    last = p - 1

    def rec(i: int, alive: tuple[int, ...]) -> None:
        v = order[i]
        lk = probe[i]
        if seeds[i] is not None:
            cands = seeds[i]
        else:
            best = None
            for index, _, other, _ in lk:
                lst = index.get(val[other], ())
                if best is None or len(lst) < len(best):
                    best = lst
            cands = best
        ck = checks[i]
        test = has_checks[i]
        ahead = need[i]
        for c in cands:
            if c in used:
                continue
            ok = True
            for index in ahead:
                if c not in index:
                    ok = False
                    break
            if not ok:
                continue
            for _, pairs, other, forward in lk:
                if ((val[other], c) if forward else (c, val[other])) not in pairs:
                    ok = False
                    break
            if not ok:
                continue
            val[v] = c
            if test:
                rk[v] = rank[c]
                still = tuple(di for di in alive if all(_atom_holds(at, rk) for at in ck[di]))
                if not still:
                    continue
            else:
                rk[v] = rank[c]
                still = alive
            if i == last:
                out.append(tuple(val))
                continue
            used.add(c)
            rec(i + 1, still)
            used.discard(c)

    rec(0, tuple(range(nd)))
    return out


def evaluate_cqset(
    cqs: CQSet | Sequence[ConjunctiveQuery],
    relations: Relation | Callable[[int, ConjunctiveQuery], Sequence[Relation]],
    rank: Mapping[int, int],
    domain: Iterable[int] | None = None,
) -> list[tuple[int, tuple[int, ...]]]:
    """Evaluate every query; results are ``(query index, node tuple)``.

    ``relations`` is a shared relation or a callable giving the per-subgoal
    relations for query ``qi``.
    """
    out = []
    for qi, q in enumerate(cqs):
        rels = relations if isinstance(relations, Relation) else relations(qi, q)
        out.extend((qi, t) for t in evaluate_cq(q, rels, rank, domain))
    return out


def count_orientations(s: SampleGraph) -> int:
    """Number of acyclic orientations consistent with some ordering (for reporting)."""
    return len({cq_from_ordering(s, o).subgoals for o in itertools.permutations(range(s.p))})


def quotient_size(s: SampleGraph) -> int:
    return math.factorial(s.p) // len(automorphisms(s))
