import json
import random
from math import comb

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import canon, naive_instances, random_graph, relabel
from subgraph_mr.cq import generate_cqs
from subgraph_mr.cycles import cycle_cqs
from subgraph_mr.generators import complete_graph, cycle_graph, gnm, petersen_graph
from subgraph_mr.graph import DataGraph, bucket_map, make_order
from subgraph_mr.mapreduce import (
    map_bucket_ordered,
    map_multiway_triangle,
    map_partition,
    map_variable_oriented,
    reduce_evaluate,
    run_round,
    variable_oriented_pairs_per_edge,
)
from subgraph_mr.planner import StructuralError, cost_expression
from subgraph_mr.samples import cycle, edge, lollipop, square, triangle


def keys_per_edge(shuffle):
    out = {}
    for key, vals in shuffle.items():
        for u, v, _ in vals:
            out.setdefault(frozenset((u, v)), set()).add(key)
    return out


def found(s, instances):
    ts = canon(s, [t for _, t in instances])
    assert len(ts) == len(set(ts)), "duplicate instance"
    return set(ts)


# ---------------------------------------------------------------- mappers


@pytest.mark.parametrize("b", [3, 5, 12])
def test_partition_key_counts(b):
    g = random_graph(40, 0.2, b)
    grp = bucket_map(g.nodes, b, 0)
    for e, keys in keys_per_edge(map_partition(g, b)).items():
        u, v = tuple(e)
        want = comb(b - 1, 2) if grp[u] == grp[v] else b - 2
        assert len(keys) == want
        assert all(len(k) == 3 and list(k) == sorted(set(k)) for k in keys)
        assert all(grp[u] in k and grp[v] in k for k in keys)


def test_partition_rejects_small_b():
    with pytest.raises(ValueError):
        map_partition(complete_graph(4), 2)


def test_partition_replication_near_closed_form():
    g = gnm(4000, 10**4, seed=3)
    _, rep = run_round(g, "partition", generate_cqs(triangle()), b=12, evaluate=False)
    assert rep.per_edge_replication == pytest.approx(13.75, rel=0.02)
    assert rep.key_value_pairs_emitted == rep.predicted_pairs


@pytest.mark.parametrize("b", [1, 2, 6])
def test_multiway_keys(b):
    g = random_graph(30, 0.2, b)
    sh = map_multiway_triangle(g, b)
    raw = {}
    for vals in sh.values():
        for u, v, _ in vals:
            raw[(u, v)] = raw.get((u, v), 0) + 1
    assert set(raw.values()) == {3 * b}
    assert {len(k) for k in keys_per_edge(sh).values()} == {3 * b - 2}


def test_multiway_two_raw_keys_coincide():
    # ids 1 and 2 land in different buckets for b = 6 under seed 0
    h = bucket_map([1, 2], 6)
    assert h[1] != h[2]
    sh = map_multiway_triangle(DataGraph.from_edges([(1, 2)]), 6)
    sizes = sorted(len(v) for v in sh.values())
    assert sizes.count(2) == 2 and sizes.count(1) == 3 * 6 - 4


@pytest.mark.parametrize("b,p", [(1, 3), (4, 2), (7, 3), (10, 4)])
def test_bucket_ordered_keys(b, p):
    g = random_graph(30, 0.2, b * p)
    h = bucket_map(g.nodes, b)
    for e, keys in keys_per_edge(map_bucket_ordered(g, b, p)).items():
        assert len(keys) == comb(b + p - 3, p - 2)
        u, v = tuple(e)
        for k in keys:
            assert list(k) == sorted(k) and len(k) == p
            rest = list(k)
            rest.remove(h[u])
            assert h[v] in rest


def test_bucket_ordered_reducer_total():
    g = complete_graph(60)
    assert len(map_bucket_ordered(g, 10, 3)) == 220


def test_variable_oriented_single_edge():
    g = DataGraph.from_edges([(3, 9)])
    sh = map_variable_oriented(g, generate_cqs(edge()), [1, 1])
    assert sum(len(v) for v in sh.values()) == 1 and len(sh) == 1


@pytest.mark.parametrize("shares", [(1, 1, 1, 1), (2, 3, 2, 3), (3, 1, 2, 4)])
def test_variable_oriented_square_matches_expression(shares):
    cqs = generate_cqs(square())
    g = random_graph(20, 0.3, 1)
    sh = map_variable_oriented(g, cqs, list(shares))
    emitted = sum(len(v) for v in sh.values())
    expr = cost_expression(cqs, "variable-oriented")
    assert emitted == expr.value(shares) * g.edge_count


def test_variable_oriented_hexagon_plan():
    cqs = generate_cqs(cycle(6))
    shares = [5, 10, 10, 10, 10, 10]
    # two-way edges at X1 cost 2 * 10^4 each, the four others 5 * 10^3
    assert variable_oriented_pairs_per_edge(cqs, shares) == 60000
    g = DataGraph.from_edges([(0, 1), (5, 8)])
    sh = map_variable_oriented(g, cqs, shares)
    assert sum(len(v) for v in sh.values()) == 120000


def test_variable_oriented_counts_dominated_shares():
    cqs = generate_cqs(lollipop())
    shares = [2, 3, 2, 2]
    expr = cost_expression(cqs, "variable-oriented")
    g = random_graph(12, 0.4, 5)
    _, rep = run_round(g, "variable-oriented", cqs, shares=shares, evaluate=False)
    assert rep.key_value_pairs_emitted == rep.predicted_pairs
    assert rep.predicted_pairs > expr.value(shares) * g.edge_count


def test_variable_oriented_requires_integer_shares():
    with pytest.raises(ValueError):
        map_variable_oriented(complete_graph(3), generate_cqs(triangle()), [1.5, 2, 2])


# ---------------------------------------------------------------- reducers


def test_reduce_empty():
    assert reduce_evaluate((1, 1, 1), [], list(generate_cqs(triangle())), {}) == []


def test_reduce_one_bucket_triangle():
    g = complete_graph(3)
    _, rep = run_round(g, "bucket-ordered", generate_cqs(triangle()), b=1)
    assert rep.instances_found == 1 and rep.distinct_reducers_used == 1


# ---------------------------------------------------------------- rounds


def test_k4_bucket_ordered():
    inst, rep = run_round(complete_graph(4), "bucket-ordered", generate_cqs(triangle()), b=2)
    assert len(found(triangle(), inst)) == 4 and rep.instances_found == 4


def test_petersen_pentagons():
    for cqs in (generate_cqs(cycle(5)), cycle_cqs(5)):
        inst, _ = run_round(petersen_graph(), "bucket-ordered", cqs, b=3)
        assert len(found(cycle(5), inst)) == 12


def test_square_on_c4():
    for scheme, kw in [("bucket-ordered", {"b": 2}), ("partition", {"b": 5}),
                       ("variable-oriented", {"shares": [2, 2, 2, 2]})]:
        inst, _ = run_round(cycle_graph(4), scheme, generate_cqs(square()), **kw)
        assert len(found(square(), inst)) == 1


def test_single_reducer_degenerates_to_serial():
    g = random_graph(14, 0.4, 2)
    for s in (triangle(), lollipop()):
        inst, rep = run_round(g, "bucket-ordered", generate_cqs(s), b=1)
        assert rep.distinct_reducers_used == 1 and rep.per_edge_replication == 1
        assert found(s, inst) == naive_instances(g, s)


@settings(max_examples=25)
@given(st.integers(0, 10**6), st.sampled_from([0.15, 0.3, 0.5]), st.integers(1, 5))
def test_triangle_schemes_agree(seed, prob, b):
    g = relabel(random_graph(16, prob, seed), seed)
    cqs = generate_cqs(triangle())
    want = naive_instances(g, triangle())
    runs = {
        "partition": dict(b=b + 2),
        "multiway": dict(b=b),
        "bucket-ordered": dict(b=b),
        "variable-oriented": dict(shares=[b, b, 1]),
    }
    for scheme, kw in runs.items():
        inst, rep = run_round(g, scheme, cqs, seed=seed % 7, **kw)
        assert found(triangle(), inst) == want, scheme
        assert rep.key_value_pairs_emitted == rep.predicted_pairs, scheme


@pytest.mark.parametrize("s", [square(), lollipop(), cycle(5)])
def test_general_schemes_agree(s):
    rng = random.Random(s.p)
    for trial in range(4):
        g = relabel(random_graph(11, rng.choice([0.3, 0.5]), trial), trial)
        want = naive_instances(g, s)
        cqs = generate_cqs(s)
        bo, _ = run_round(g, "bucket-ordered", cqs, b=3, seed=trial)
        vo, _ = run_round(g, "variable-oriented", cqs, shares=[2] * s.p, seed=trial)
        pa, _ = run_round(g, "partition", cqs, b=s.p + 1, seed=trial)
        assert found(s, bo) == found(s, vo) == found(s, pa) == want


def test_threads_do_not_change_results():
    g = gnm(300, 2000, seed=4)
    cqs = generate_cqs(triangle())
    a, ra = run_round(g, "bucket-ordered", cqs, b=4, threads=1)
    b, rb = run_round(g, "bucket-ordered", cqs, b=4, threads=4)
    assert a == b and ra.dumps() == rb.dumps()


def test_report_fields_and_json():
    g = gnm(200, 800, seed=1)
    _, rep = run_round(g, "multiway", generate_cqs(triangle()), b=6, seed=9)
    assert rep.per_edge_replication == 16 and rep.replication_exact == 16
    assert rep.raw_pairs == 18 * 800
    assert rep.distinct_reducers_used <= 216
    d = json.loads(rep.dumps())
    assert d["scheme"] == "multiway" and d["seed"] == 9
    assert sum(int(k) * v for k, v in d["reducer_edge_histogram"].items()) == rep.key_value_pairs_emitted


def test_run_round_errors():
    g = complete_graph(4)
    with pytest.raises(ValueError):
        run_round(g, "hypercube", generate_cqs(triangle()), b=2)
    with pytest.raises(StructuralError):
        run_round(g, "multiway", generate_cqs(square()), b=2)
    with pytest.raises(ValueError):
        run_round(g, "partition", generate_cqs(square()), b=3)
    with pytest.raises(ValueError):
        run_round(g, "variable-oriented", generate_cqs(triangle()))
