import random
from itertools import combinations

import pytest
from hypothesis import given, settings, strategies as st

from optinter.equivalence import (ci_signature, enumerate_dags, experiment_marks, is_unique,
                                  markov_class, meek_closure, members, ome_by_enumeration,
                                  pattern_from_oracle, update_knowledge)
from optinter.errors import ConflictError, EnumerationGuardError, InputError
from optinter.formats import parse_kg
from optinter.graphs import (NON_ADJACENT, UNDIRECTED, Dag, EdgeMark, KnowledgeGraph)
from optinter.oracle import CiOracle

from oracles import all_dags_naive, consistent_with, markov_equivalent


def random_dag(n, p, seed):
    rng = random.Random(seed)
    order = list(range(n))
    rng.shuffle(order)
    return Dag.from_edges(n, [(order[i], order[j]) for i in range(n)
                              for j in range(i + 1, n) if rng.random() < p])


@pytest.mark.parametrize("n, count", [(0, 1), (1, 1), (2, 3), (3, 25), (4, 543)])
def test_enumeration_counts_and_distinctness(n, count):
    got = [g.parents for g in enumerate_dags(n)]
    assert len(got) == count == len(set(got))


def test_enumeration_matches_naive():
    for n in (3, 4):
        assert {g.parents for g in enumerate_dags(n)} == {g.parents for g in all_dags_naive(n)}


def test_enumeration_guard():
    with pytest.raises(EnumerationGuardError):
        next(enumerate_dags(7))
    with pytest.raises(InputError):
        enumerate_dags(-1)


def test_markov_class_matches_skeleton_and_colliders():
    dags = list(enumerate_dags(4))
    for truth in dags[::7]:
        expected = {g.parents for g in dags if markov_equivalent(g, truth)}
        assert {g.parents for g in markov_class(truth)} == expected


def test_pattern_equals_enumeration_at_three():
    for truth in enumerate_dags(3):
        assert pattern_from_oracle(CiOracle(truth)) == ome_by_enumeration(truth)


def test_members_of_pattern_are_the_class():
    for truth in list(enumerate_dags(4))[::3]:
        kg = pattern_from_oracle(CiOracle(truth))
        got = {g.parents for g in members(kg)}
        assert truth.parents in got
        assert got == {g.parents for g in markov_class(truth)}


def test_chain_members_semantics(chain):
    kg = pattern_from_oracle(CiOracle(chain))
    assert len(members(kg)) == 3
    # without the no-hidden-collider reading, X -> Y <- Z also fits the marks
    assert len(members(kg, structural_only=True)) == 4


def test_members_guard(five_ome):
    with pytest.raises(EnumerationGuardError):
        members(five_ome, guard=4)


def test_one_experiment_is_exact_at_four():
    """Members after one update equal the brute-force interventional class."""
    n = 4
    dags = list(enumerate_dags(n))
    obs = {g.parents: ci_signature(g) for g in dags}
    for I in [(), (0,), (1, 2), (0, 3), (0, 1, 2), (0, 1, 2, 3)]:
        manip = {g.parents: ci_signature(g, I) for g in dags}
        for truth in dags[::2]:
            kg = update_knowledge(pattern_from_oracle(CiOracle(truth)), I,
                                  CiOracle(truth, frozenset(I)))
            cls = {g.parents for g in dags if obs[g.parents] == obs[truth.parents]
                   and manip[g.parents] == manip[truth.parents]}
            assert {g.parents for g in members(kg)} == cls


@settings(max_examples=80, deadline=None)
@given(st.integers(2, 7), st.floats(0, 1), st.integers(0, 10**6), st.data())
def test_updates_keep_the_truth(n, p, seed, data):
    truth = random_dag(n, p, seed)
    kg = pattern_from_oracle(CiOracle(truth))
    assert consistent_with(truth, kg)
    for _ in range(2):
        I = frozenset(data.draw(st.sets(st.integers(0, n - 1))))
        kg = update_knowledge(kg, I, CiOracle(truth, I))
        assert consistent_with(truth, kg)
        assert meek_closure(kg) is kg


def test_experiment_marks_on_chain(chain):
    kg = pattern_from_oracle(CiOracle(chain))
    res = experiment_marks(kg, {1}, CiOracle(chain, frozenset({1})))
    d = res.derived
    assert d.mark(0, 1) == EdgeMark.semi_directed(0, 1)
    assert d.mark(1, 2) == EdgeMark.directed(1, 2)
    assert d.mark(0, 2) == NON_ADJACENT
    final = update_knowledge(kg, {1}, CiOracle(chain, frozenset({1})))
    assert is_unique(final)
    assert final.directed_edges() == [(0, 1), (1, 2)]


def test_experiment_marks_checks_oracle():
    g = Dag.from_edges(2, [(0, 1)])
    with pytest.raises(InputError):
        experiment_marks(KnowledgeGraph.build(2), {0}, CiOracle(g))


def test_both_intervened_learn_nothing():
    g = Dag.from_edges(2, [(0, 1)])
    res = experiment_marks(KnowledgeGraph.build(2), {0, 1}, CiOracle(g, frozenset({0, 1})))
    assert not res.derived.is_known(0, 1)


def kg_of(text):
    return parse_kg("vertices: A B C D\n" + text)


def test_meek_rule_one():
    kg = meek_closure(kg_of("A -> B\nB -- C\nA !! C\n"))
    assert kg.mark(1, 2) == EdgeMark.directed(1, 2)


def test_meek_rule_two():
    kg = meek_closure(kg_of("A -> B\nB -> C\nA -- C\n"))
    assert kg.mark(0, 2) == EdgeMark.directed(0, 2)


def test_meek_rule_three():
    kg = meek_closure(kg_of("A -- B\nA -- C\nA -- D\nB -> D\nC -> D\nB !! C\n"))
    assert kg.mark(0, 3) == EdgeMark.directed(0, 3)
    assert kg.mark(0, 1) == UNDIRECTED


def test_meek_rule_four():
    kg = meek_closure(kg_of("A -- B\nA -- C\nA -- D\nD -> C\nC -> B\nB !! D\n"))
    assert kg.mark(0, 1) == EdgeMark.directed(0, 1)


def test_meek_leaves_semi_directed_alone():
    kg = kg_of("A -> B\nB ~> C\nA !! C\n")
    assert meek_closure(kg) is kg


def test_meek_new_collider_is_conflict():
    # R1 turns B - C into B -> C, which with D -> C and B !! D is a new collider
    kg = kg_of("A -> B\nB -- C\nA !! C\nD -> C\nB !! D\nA !! D\n")
    with pytest.raises(ConflictError):
        meek_closure(kg)


def test_ome_examples(chain):
    v = Dag.from_edges(3, [(0, 1), (2, 1)])
    assert is_unique(pattern_from_oracle(CiOracle(v)))
    pat = pattern_from_oracle(CiOracle(chain))
    assert pat.mark(0, 1) == UNDIRECTED and pat.mark(0, 2) == NON_ADJACENT
    assert pattern_from_oracle(CiOracle(Dag.from_edges(0))) == KnowledgeGraph.build(0)
    with pytest.raises(InputError):
        pattern_from_oracle(CiOracle(chain, frozenset({0})))


def test_complete_ome_members():
    g = Dag.complete([0, 1, 2, 3])
    kg = pattern_from_oracle(CiOracle(g))
    assert all(kg.mark(a, b) == UNDIRECTED for a, b in combinations(range(4), 2))
    assert len(members(kg)) == 24


def test_colliders_with_intervened_endpoint_are_inferred_not_direct():
    truth = Dag.from_edges(3, [(0, 1), (1, 2), (0, 2)])
    kg = KnowledgeGraph.build(3, default=UNDIRECTED)
    res = experiment_marks(kg, {1}, CiOracle(truth, frozenset({1})))
    # 0 -> 1 is cut, so 0 -> 2 <- 1 is a collider of the manipulated graph
    assert res.derived.mark(0, 2) == UNDIRECTED
    assert res.inferred.mark(0, 2) == EdgeMark.directed(0, 2)
    assert kg.combine(res.derived).directed_edges() == [(0, 1), (1, 2)]
    final = update_knowledge(kg, {1}, CiOracle(truth, frozenset({1})))
    assert final.directed_edges() == truth.edges
