"""Named sample graphs and the ``--sample`` spec parser."""

from __future__ import annotations

import os

from .graph import SampleGraph, load_sample_graph


def edge() -> SampleGraph:
    return SampleGraph.from_named_edges("AB", [("A", "B")])


def triangle() -> SampleGraph:
    return SampleGraph.from_named_edges("XYZ", [("X", "Y"), ("Y", "Z"), ("X", "Z")])


def square() -> SampleGraph:
    # W-X-Y-Z-W; edge order gives E(W,X) & E(X,Y) & E(Y,Z) & E(W,Z)
    return SampleGraph.from_named_edges(
        "WXYZ", [("W", "X"), ("X", "Y"), ("Y", "Z"), ("W", "Z")]
    )


def lollipop() -> SampleGraph:
    # triangle X,Y,Z with W hanging off X
    return SampleGraph.from_named_edges(
        "WXYZ", [("W", "X"), ("X", "Y"), ("X", "Z"), ("Y", "Z")]
    )


def cycle(p: int) -> SampleGraph:
    if p < 3:
        raise ValueError("cycle needs p >= 3")
    names = tuple(f"X{i}" for i in range(1, p + 1))
    edges = tuple((i, i + 1) for i in range(p - 1)) + ((0, p - 1),)
    return SampleGraph(names, edges)


def path(p: int) -> SampleGraph:
    if p < 1:
        raise ValueError("path needs p >= 1")
    names = tuple(f"X{i}" for i in range(1, p + 1))
    return SampleGraph(names, tuple((i, i + 1) for i in range(p - 1)))


def star(p: int) -> SampleGraph:
    """Star on ``p`` nodes: center ``X1`` and ``p - 1`` leaves."""
    if p < 2:
        raise ValueError("star needs p >= 2")
    names = tuple(f"X{i}" for i in range(1, p + 1))
    return SampleGraph(names, tuple((0, i) for i in range(1, p)))


def clique(p: int) -> SampleGraph:
    if p < 1:
        raise ValueError("clique needs p >= 1")
    names = tuple(f"X{i}" for i in range(1, p + 1))
    return SampleGraph(names, tuple((i, j) for i in range(p) for j in range(i + 1, p)))


_FIXED = {"edge": edge, "triangle": triangle, "square": square, "lollipop": lollipop}
_PARAM = {"cycle": cycle, "star": star, "clique": clique, "path": path}


def parse_sample(spec: str) -> SampleGraph:
    """Resolve ``triangle``, ``cycle:5``, ``star:4``, ... or a sample file path."""
    if spec in _FIXED:
        return _FIXED[spec]()
    name, sep, arg = spec.partition(":")
    if sep and name in _PARAM:
        try:
            p = int(arg)
        except ValueError:
            raise ValueError(f"bad size in sample spec {spec!r}") from None
        return _PARAM[name](p)
    if os.path.exists(spec):
        with open(spec, "rb") as fh:
            return load_sample_graph(fh.read())
    raise ValueError(
        f"unknown sample {spec!r}; use one of {sorted(_FIXED)}, "
        f"{', '.join(k + ':p' for k in sorted(_PARAM))} or a file path"
    )


def cycle_length(s: SampleGraph) -> int | None:
    """``p`` if ``s`` is the cycle ``C_p`` (any labelling), else ``None``."""
    p = s.p
    if p < 3 or len(s.edges) != p or not s.is_connected():
        return None
    return p if all(d == 2 for d in s.degrees()) else None
