"""Instance identity and text output shared by the enumerators."""

from __future__ import annotations

from typing import Iterable, Sequence


def canonical_instance(t: Sequence[int], auts: Sequence[Sequence[int]]) -> tuple[int, ...]:
    """Smallest node tuple in the automorphism orbit of ``t``.

    ``t[i]`` is the data node for sample variable ``i``; composing with an
    automorphism gives the same subgraph under another labelling.
    """
    p = len(t)
    return min(tuple(t[mu[i]] for i in range(p)) for mu in auts)


def canonical_set(ts: Iterable[Sequence[int]], auts) -> set[tuple[int, ...]]:
    return {canonical_instance(t, auts) for t in ts}


def format_instance(t: Sequence[int], names: Sequence[str], cq_id: int | str = 0) -> str:
    body = " ".join(f"v({n})={x}" for n, x in zip(names, t))
    return f"{cq_id}: {body}"


def write_instances(path, rows: Iterable[tuple[int | str, Sequence[int]]], names: Sequence[str]) -> int:
    n = 0
    with open(path, "w") as fh:
        for cq_id, t in rows:
            fh.write(format_instance(t, names, cq_id) + "\n")
            n += 1
    return n
