"""Sample graphs built to meet the structural assumptions of the closed forms."""

from subgraph_mr.graph import SampleGraph

# S1, S1, S2, S3, S3, S2 around a hexagon: every node has half its
# neighbours in its own set or S2 as the 2:1:1 case requires
_HEX_ROLES = ("S1", "S1", "S2", "S3", "S3", "S2")


def hexagon_blowup(repeats: int = 1, copies: int = 1):
    """Cycle of ``6 * repeats`` role slots, each slot replaced by ``copies``
    nodes joined completely to the nodes of neighbouring slots.

    Returns ``(sample, bidirectional edges, degree, (s1, s2, s3))``.
    """
    roles = _HEX_ROLES * repeats
    slots = len(roles)
    names = tuple(f"X{i + 1}" for i in range(slots * copies))
    edges, bi = [], []
    for i in range(slots):
        j = (i + 1) % slots
        for c in range(copies):
            for c2 in range(copies):
                e = (i * copies + c, j * copies + c2)
                edges.append(e)
                if "S1" in (roles[i], roles[j]):
                    bi.append(e)
    size = slots * copies // 3
    return SampleGraph(names, tuple(edges)), bi, 2 * copies, (size, size, size)


def covering_bipartite(half: int, degree: int, s3: int):
    """Circulant ``degree``-regular bipartite sample.  The first side is S2
    (independent, touching every edge); on the other side the first ``s3``
    nodes form S3 (one-way edges) and the rest S1 (two-way edges).

    Returns ``(sample, bidirectional edges, degree, s3)``.
    """
    edges, bi = [], []
    for i in range(half):
        for j in range(degree):
            t = (i + j) % half
            e = (i, half + t)
            edges.append(e)
            if t >= s3:
                bi.append(e)
    names = tuple(f"X{i + 1}" for i in range(2 * half))
    return SampleGraph(names, tuple(edges)), bi, degree, s3


EQ2_INSTANCES = [
    hexagon_blowup(1, 1),
    hexagon_blowup(2, 1),
    hexagon_blowup(3, 1),
    hexagon_blowup(1, 2),
    hexagon_blowup(1, 3),
]

EQ3_INSTANCES = [
    covering_bipartite(2, 2, 1),
    covering_bipartite(3, 2, 1),
    covering_bipartite(3, 2, 2),
    covering_bipartite(3, 3, 1),
    covering_bipartite(4, 3, 2),
]
