import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import canon, naive_instances, random_graph, relabel
from subgraph_mr.cq import accepted_orderings, evaluate_cqset, generate_cqs, oriented_relation
from subgraph_mr.cycles import (
    RunSequence,
    canonical_run_sequences,
    conditional_bound,
    cq_from_run_sequence,
    cycle_class_count,
    cycle_cqs,
    extra_conditions,
    is_palindrome,
    period,
    run_sequences,
    symmetry_correction,
)
from subgraph_mr.graph import make_order
from subgraph_mr.samples import cycle


def digits(p):
    return [r.digits for r in canonical_run_sequences(p)]


def test_compositions_of_five():
    assert sorted(r.digits for r in run_sequences(5)) == sorted(
        ["14", "23", "32", "41", "1112", "1121", "1211", "2111"]
    )
    assert sorted(r.digits for r in run_sequences(3)) == ["12", "21"]


def test_pattern_of_14():
    assert RunSequence((1, 4)).pattern == "udddd"


def test_bad_inputs():
    with pytest.raises(ValueError):
        run_sequences(2)
    with pytest.raises(ValueError):
        RunSequence((1, 2, 3))


def test_canonical_counts():
    assert digits(3) == ["12"]
    assert digits(4) == ["13", "22", "1111"]
    assert digits(5) == ["14", "23", "1112"]
    assert digits(6) == ["15", "24", "33", "1113", "1122", "1212", "1221", "111111"]
    assert len(digits(7)) == 9


def test_pentagon_patterns():
    pats = {r.pattern for r in canonical_run_sequences(5)}
    # 1112 and 1121 are one class: flip then shift
    assert pats == {"udddd", "uuddd", "ududd"}
    assert RunSequence((1, 1, 2, 1)).canonical() == RunSequence((1, 1, 1, 2))


@pytest.mark.parametrize("p", range(3, 11))
def test_class_count_matches_burnside(p):
    assert len(canonical_run_sequences(p)) == cycle_class_count(p)


@pytest.mark.parametrize("p", [3, 5, 7])
def test_prime_counts_meet_conditional_bound(p):
    assert Fraction(len(canonical_run_sequences(p))) == conditional_bound(p)
    assert symmetry_correction(p) == 0


def test_heptagon_bound_is_nine():
    assert conditional_bound(7) == 9


def test_hexagon_correction():
    # 2*6*8 - 62
    assert symmetry_correction(6) == 34


@given(st.integers(3, 9), st.data())
def test_canonical_outputs_are_pairwise_inequivalent(p, data):
    reps = canonical_run_sequences(p)
    for a, b in itertools.combinations(reps, 2):
        assert b not in a.equivalents()
    r = data.draw(st.sampled_from(run_sequences(p)))
    assert r.canonical() in reps


def test_first_pentagon_cq_text():
    q = cq_from_run_sequence(RunSequence((1, 4)))
    assert q.render() == (
        "E(X1,X2) & E(X3,X2) & E(X4,X3) & E(X5,X4) & E(X1,X5) & "
        "X1<X2 & X3<X2 & X4<X3 & X5<X4 & X1<X5"
    )


def _extras(runs):
    q = cq_from_run_sequence(RunSequence(runs))
    n = len(q.subgoals)
    return [f"{q.names[a]}<{q.names[b]}" for _, a, b in q.condition[0][n:]]


def test_hexagon_extra_conditions():
    assert _extras((3, 3)) == ["X2<X6"]
    assert _extras((1, 1, 1, 1, 1, 1)) == ["X1<X3", "X1<X5", "X2<X6"]
    assert _extras((1, 2)) == []
    assert _extras((1, 5)) == []


def test_palindrome_and_period():
    assert is_palindrome("uuuddd")
    assert not is_palindrome("udddd")
    assert period("ududud") == 2
    assert period("uuddd") == 5
    assert extra_conditions("udddd") == []


@pytest.mark.parametrize("p", [3, 4, 5, 6, 7])
def test_orderings_accepted_once_per_cycle(p):
    """Every ordering of the cycle's nodes, up to the dihedral group, is
    accepted by exactly one CQ in exactly one placement."""
    cqs = cycle_cqs(p)
    dihedral = [tuple((i + r) % p for i in range(p)) for r in range(p)]
    dihedral += [tuple((r - i) % p for i in range(p)) for r in range(p)]
    acc = [accepted_orderings(q) for q in cqs]
    for o in itertools.permutations(range(p)):
        hits = sum(1 for a in acc for mu in dihedral if tuple(mu[x] for x in o) in a)
        assert hits == 1


@pytest.mark.parametrize("p", [3, 4, 5, 6, 7])
def test_cycle_cqs_exactly_once_on_data(p):
    rng = random.Random(p)
    s = cycle(p)
    for trial in range(6):
        g = relabel(random_graph(9 if p > 5 else 12, rng.choice([0.3, 0.5]), 100 * p + trial), trial)
        rank = make_order(g, "degree-then-id").rank(g.nodes)
        rel = oriented_relation(g.edges, rank)
        want = naive_instances(g, s) if p <= 6 else None
        runs = canon(s, [t for _, t in evaluate_cqset(cycle_cqs(p), rel, rank)])
        gen = canon(s, [t for _, t in evaluate_cqset(generate_cqs(s), rel, rank)])
        assert len(runs) == len(set(runs)) and len(gen) == len(set(gen))
        assert set(runs) == set(gen)
        if want is not None:
            assert set(runs) == want


def test_pentagon_counts_both_methods():
    assert len(cycle_cqs(5)) == 3
    assert len(generate_cqs(cycle(5))) == 7
