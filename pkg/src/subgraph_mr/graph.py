"""Data graphs, sample graphs, node hashing and node orders."""

from __future__ import annotations

import io
import logging
import warnings
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

log = logging.getLogger(__name__)

HASH_MULTIPLIER = 0x9E3779B97F4A7C15
_MASK64 = (1 << 64) - 1

ORDER_KINDS = ("bucket-then-id", "degree-then-id", "id")


class GraphFormatError(ValueError):
    """Malformed edge-list input."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SelfLoopError(GraphFormatError):
    def __init__(self, node: int, line: int | None = None):
        self.node = node
        super().__init__(f"self-loop on node {node}", line)


class DuplicateEdgeWarning(UserWarning):
    pass


def _norm(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True, eq=False)
class DataGraph:
    """Immutable undirected simple graph.

    Node ids are kept verbatim (any non-negative 64-bit integers). Edges are
    stored once, as ``(min, max)`` pairs.
    """

    nodes: tuple[int, ...]
    edges: frozenset
    adjacency: dict = field(repr=False)
    duplicates_collapsed: int = 0

    @classmethod
    def from_edges(
        cls,
        edges: Iterable[tuple[int, int]],
        nodes: Iterable[int] = (),
    ) -> "DataGraph":
        es: set[tuple[int, int]] = set()
        dup = 0
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise SelfLoopError(u)
            if u < 0 or v < 0:
                raise GraphFormatError(f"negative node id in edge ({u}, {v})")
            e = _norm(u, v)
            if e in es:
                dup += 1
            else:
                es.add(e)
        return cls._build(es, nodes, dup)

    @classmethod
    def _build(cls, es: set, nodes: Iterable[int], dup: int) -> "DataGraph":
        adj: dict[int, list[int]] = {int(x): [] for x in nodes}
        for u, v in es:
            adj.setdefault(u, []).append(v)
            adj.setdefault(v, []).append(u)
        adjacency = {u: tuple(sorted(ns)) for u, ns in adj.items()}
        return cls(tuple(sorted(adjacency)), frozenset(es), adjacency, dup)

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    n = node_count
    m = edge_count

    def degree(self, u: int) -> int:
        return len(self.adjacency.get(u, ()))

    def neighbors(self, u: int) -> tuple[int, ...]:
        return self.adjacency.get(u, ())

    def has_edge(self, u: int, v: int) -> bool:
        return _norm(u, v) in self.edges

    def max_degree(self) -> int:
        return max((len(a) for a in self.adjacency.values()), default=0)

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def subgraph(self, edges: Iterable[tuple[int, int]]) -> "DataGraph":
        """Graph made of the given edges (assumed already normalized and distinct)."""
        return self._build(set(edges), (), 0)

    def to_edge_list(self) -> str:
        return "".join(f"{u} {v}\n" for u, v in self.sorted_edges())

    def __len__(self) -> int:
        return self.node_count

    def __repr__(self) -> str:
        return f"DataGraph(n={self.node_count}, m={self.edge_count})"


def _lines(text) -> Iterator[str]:
    if isinstance(text, (bytes, bytearray)):
        text = text.decode()
    if isinstance(text, str):
        yield from io.StringIO(text)
    else:
        for line in text:
            yield line.decode() if isinstance(line, bytes) else line


def _parse_pairs(text, allow_header: bool) -> tuple[list[tuple[int, int]], int | None]:
    pairs = []
    header = None
    for lineno, raw in enumerate(_lines(text), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if allow_header and parts[0] == "p" and header is None and not pairs:
            if len(parts) != 2 or not parts[1].isdigit():
                raise GraphFormatError("header must be 'p <count>'", lineno)
            header = int(parts[1])
            continue
        if len(parts) != 2:
            raise GraphFormatError(f"expected two node ids, got {line!r}", lineno)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphFormatError(f"non-integer node id in {line!r}", lineno) from None
        if u < 0 or v < 0 or u > _MASK64 or v > _MASK64:
            raise GraphFormatError(f"node id out of range in {line!r}", lineno)
        if u == v:
            raise SelfLoopError(u, lineno)
        pairs.append((u, v))
    return pairs, header


def load_edge_list(text) -> DataGraph:
    """Parse a whitespace-separated edge list.

    ``text`` may be a ``str``, ``bytes`` or an iterable of lines (an open
    file).  Blank lines and ``#`` comments are skipped.  Duplicate edges,
    including the reverse orientation of an edge already seen, are collapsed;
    the number collapsed is kept in ``duplicates_collapsed`` and reported
    with a :class:`DuplicateEdgeWarning`.
    """
    es: set[tuple[int, int]] = set()
    dup = 0
    pairs, _ = _parse_pairs(text, allow_header=False)
    for u, v in pairs:
        e = _norm(u, v)
        if e in es:
            dup += 1
        else:
            es.add(e)
    if dup:
        warnings.warn(f"collapsed {dup} duplicate edge(s)", DuplicateEdgeWarning, stacklevel=2)
    return DataGraph._build(es, (), dup)


def read_edge_list(path) -> DataGraph:
    with open(path, "rb") as fh:
        return load_edge_list(fh.read())


def edge_exists(g: DataGraph, u: int, v: int) -> bool:
    if u == v:
        raise ValueError(f"edge_exists called with identical endpoints ({u})")
    return _norm(u, v) in g.edges


# ---------------------------------------------------------------- sample graphs


@dataclass(frozen=True)
class SampleGraph:
    """A small pattern graph.

    ``names`` are the CQ variable names, in variable order.  ``edges`` holds
    index pairs in declaration order; that order is the subgoal order of every
    CQ generated from the sample.
    """

    names: tuple[str, ...]
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        p = len(self.names)
        if p < 1:
            raise ValueError("sample graph needs at least one node")
        if len(set(self.names)) != p:
            raise ValueError("duplicate node names")
        seen = set()
        for a, b in self.edges:
            if a == b:
                raise ValueError(f"self-loop on {self.names[a]}")
            if not (0 <= a < p and 0 <= b < p):
                raise ValueError(f"edge ({a}, {b}) out of range")
            key = frozenset((a, b))
            if key in seen:
                raise ValueError(f"duplicate edge {self.names[a]}-{self.names[b]}")
            seen.add(key)

    @classmethod
    def from_named_edges(cls, names: Sequence[str], edges: Iterable[tuple[str, str]]) -> "SampleGraph":
        idx = {nm: i for i, nm in enumerate(names)}
        return cls(tuple(names), tuple((idx[a], idx[b]) for a, b in edges))

    @property
    def p(self) -> int:
        return len(self.names)

    node_count = p

    def edge_set(self) -> frozenset:
        return frozenset(frozenset(e) for e in self.edges)

    def adjacency(self) -> list[set[int]]:
        adj = [set() for _ in self.names]
        for a, b in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        return adj

    def degrees(self) -> list[int]:
        return [len(a) for a in self.adjacency()]

    def is_regular(self) -> bool:
        return len(set(self.degrees())) == 1

    def components(self) -> list[list[int]]:
        adj = self.adjacency()
        seen: set[int] = set()
        comps = []
        for s in range(self.p):
            if s in seen:
                continue
            stack, comp = [s], []
            seen.add(s)
            while stack:
                x = stack.pop()
                comp.append(x)
                for y in adj[x]:
                    if y not in seen:
                        seen.add(y)
                        stack.append(y)
            comps.append(sorted(comp))
        return comps

    def is_connected(self) -> bool:
        return len(self.components()) == 1

    def induced(self, nodes: Sequence[int]) -> tuple["SampleGraph", list[int]]:
        """Induced subgraph on ``nodes``; returns it with the index map back."""
        nodes = list(nodes)
        pos = {v: i for i, v in enumerate(nodes)}
        es = tuple((pos[a], pos[b]) for a, b in self.edges if a in pos and b in pos)
        return SampleGraph(tuple(self.names[v] for v in nodes), es), nodes

    def name_of(self, i: int) -> str:
        return self.names[i]


def load_sample_graph(text) -> SampleGraph:
    """Parse a sample graph in edge-list format.

    An optional ``p <count>`` header declares the node count so isolated
    nodes can be expressed.  Node ``i`` becomes variable ``X<i>``.
    """
    pairs, header = _parse_pairs(text, allow_header=True)
    ids = sorted({x for e in pairs for x in e})
    if header is not None:
        if len(ids) > header:
            raise GraphFormatError(f"header declares {header} nodes but {len(ids)} are used")
        lo = 0 if not ids or ids[0] == 0 else 1
        ids = sorted(set(ids) | set(range(lo, lo + header)))
        if len(ids) != header:
            raise GraphFormatError(f"node ids do not fit the declared count {header}")
    if not ids:
        raise GraphFormatError("empty sample graph")
    names = tuple(f"X{i}" for i in ids)
    pos = {x: i for i, x in enumerate(ids)}
    seen = set()
    edges = []
    for u, v in pairs:
        key = frozenset((u, v))
        if key in seen:
            continue
        seen.add(key)
        edges.append((pos[u], pos[v]))
    return SampleGraph(names, tuple(edges))


# ---------------------------------------------------------------- hashing


def bucket_hash(node: int, b: int, seed: int = 0) -> int:
    """Bucket of ``node`` in ``[1, b]``.

    ``((node * 0x9E3779B97F4A7C15 + seed) mod 2**64) mod b + 1``
    """
    if b < 1:
        raise ValueError("b must be >= 1")
    return (((node * HASH_MULTIPLIER + seed) & _MASK64) % b) + 1


def bucket_hash_array(nodes, b: int, seed: int = 0) -> np.ndarray:
    """Vectorized :func:`bucket_hash`; uint64 arithmetic wraps mod 2**64."""
    if b < 1:
        raise ValueError("b must be >= 1")
    arr = np.asarray(nodes, dtype=np.uint64)
    with np.errstate(over="ignore"):
        mixed = arr * np.uint64(HASH_MULTIPLIER) + np.uint64(seed & _MASK64)
    return (mixed % np.uint64(b)).astype(np.int64) + 1


def bucket_map(nodes: Iterable[int], b: int, seed: int = 0) -> dict[int, int]:
    nodes = list(nodes)
    if not nodes:
        return {}
    return dict(zip(nodes, bucket_hash_array(nodes, b, seed).tolist()))


# ---------------------------------------------------------------- node orders


@dataclass(frozen=True, eq=False)
class NodeOrder:
    """A strict total order on data-graph nodes, given by a sort key."""

    kind: str
    bucket_count: int = 1
    seed: int = 0
    key: Callable[[int], tuple] = field(default=lambda u: (u,), repr=False)

    def less(self, u: int, v: int) -> bool:
        return self.key(u) < self.key(v)

    __call__ = less

    def sort(self, nodes: Iterable[int]) -> list[int]:
        return sorted(nodes, key=self.key)

    def rank(self, nodes: Iterable[int]) -> dict[int, int]:
        """Dense rank of each node; comparing ranks is comparing in this order."""
        return {u: i for i, u in enumerate(self.sort(nodes))}


def make_order(g: DataGraph | None, kind: str = "id", b: int = 1, seed: int = 0) -> NodeOrder:
    if kind not in ORDER_KINDS:
        raise ValueError(f"unknown order kind {kind!r}; expected one of {ORDER_KINDS}")
    if kind == "id":
        return NodeOrder("id", key=lambda u: (u,))
    if kind == "bucket-then-id":
        if b < 1:
            raise ValueError("b must be >= 1")
        if g is not None and g.node_count:
            buckets = bucket_map(g.nodes, b, seed)
            return NodeOrder(
                kind, b, seed,
                key=lambda u: (buckets[u] if u in buckets else bucket_hash(u, b, seed), u),
            )
        return NodeOrder(kind, b, seed, key=lambda u: (bucket_hash(u, b, seed), u))
    if g is None:
        raise ValueError("degree-then-id needs a graph")
    adj = g.adjacency
    return NodeOrder(kind, key=lambda u: (len(adj.get(u, ())), u))
