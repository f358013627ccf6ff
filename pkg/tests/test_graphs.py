import random

import pytest
from hypothesis import given, settings, strategies as st

from optinter.errors import ConflictError, InputError
from optinter.graphs import (ABSENT, BACKWARD, FORWARD, NO_KNOWLEDGE, NON_ADJACENT, UNDIRECTED,
                             Dag, EdgeMark, KnowledgeGraph, MarkKind, combine_marks, is_acyclic,
                             mark_bits, mark_from_bits, manipulate, maximal_cliques,
                             maximal_cliques_unknown, max_unknown_clique_size, to_mask)

from oracles import is_acyclic_naive, maximal_cliques_naive

ALL_MARKS = [UNDIRECTED, NON_ADJACENT, NO_KNOWLEDGE, EdgeMark.directed(0, 1),
             EdgeMark.directed(1, 0), EdgeMark.semi_directed(0, 1), EdgeMark.semi_directed(1, 0)]

marks = st.sampled_from(ALL_MARKS)


def random_dag(n, p, seed):
    rng = random.Random(seed)
    order = list(range(n))
    rng.shuffle(order)
    return Dag.from_edges(n, [(order[i], order[j]) for i in range(n)
                              for j in range(i + 1, n) if rng.random() < p])


dags = st.builds(random_dag, st.integers(1, 7), st.floats(0, 1), st.integers(0, 10**6))


def test_dag_rejects_cycles_and_bad_edges():
    with pytest.raises(InputError):
        Dag.from_edges(3, [(0, 1), (1, 2), (2, 0)])
    with pytest.raises(InputError):
        Dag.from_edges(2, [(0, 0)])
    with pytest.raises(InputError):
        Dag.from_edges(2, [(0, 2)])
    with pytest.raises(InputError):
        Dag.from_edges(2, [(0, 1), (1, 0)])


def test_dag_basics():
    g = Dag.from_edges(4, [(2, 3), (0, 1), (1, 2)])
    assert g.edges == [(0, 1), (1, 2), (2, 3)]
    assert g.names == ("X0", "X1", "X2", "X3")
    assert g.descendants(0) == 0b1110
    assert g.adjacent(2, 1) and not g.adjacent(0, 2)
    assert g.edge_count() == 3


@given(st.integers(0, 6), st.data())
def test_is_acyclic_matches_naive(n, data):
    pairs = [(a, b) for a in range(n) for b in range(n) if a != b]
    edges = data.draw(st.lists(st.sampled_from(pairs), unique=True, max_size=10)) if pairs else []
    edges = [e for e in edges if (e[1], e[0]) not in edges or e < (e[1], e[0])]
    assert is_acyclic(edges, n) == is_acyclic_naive(edges, n)


@given(dags, st.data())
def test_manipulate_idempotent_and_breaks_in_edges(g, data):
    I = data.draw(st.sets(st.integers(0, g.n - 1)))
    h = manipulate(g, I)
    assert manipulate(h, I) == h
    for v in I:
        assert h.parents[v] == 0
    for a, b in h.edges:
        assert g.has_edge(a, b)
    assert set(g.edges) - set(h.edges) == {(a, b) for a, b in g.edges if b in I}


@given(marks)
def test_mark_bits_round_trip(m):
    assert mark_from_bits(mark_bits(m, 0, 1), 0, 1) == m


@given(marks, marks, marks)
def test_combine_is_a_meet(a, b, c):
    def meet(x, y):
        try:
            return combine_marks(x, y)
        except ConflictError:
            return None

    ab = meet(a, b)
    assert ab == meet(b, a)
    assert meet(a, a) == a
    assert meet(a, NO_KNOWLEDGE) == a
    if ab is not None:
        assert mark_bits(ab, 0, 1) == mark_bits(a, 0, 1) & mark_bits(b, 0, 1)
        bc = meet(b, c)
        left = meet(ab, c)
        right = meet(a, bc) if bc is not None else None
        assert left == right


def test_combine_conflicts():
    with pytest.raises(ConflictError):
        combine_marks(EdgeMark.directed(0, 1), NON_ADJACENT)
    with pytest.raises(ConflictError):
        combine_marks(EdgeMark.directed(0, 1), EdgeMark.directed(1, 0))
    assert combine_marks(UNDIRECTED, EdgeMark.semi_directed(1, 0)) == EdgeMark.directed(1, 0)
    assert combine_marks(EdgeMark.semi_directed(0, 1), NON_ADJACENT) == NON_ADJACENT
    assert combine_marks(EdgeMark.semi_directed(0, 1),
                         EdgeMark.semi_directed(1, 0)) == NON_ADJACENT


def test_knowledge_graph_build_and_queries():
    kg = KnowledgeGraph.build(3, {(0, 1): EdgeMark.directed(0, 1), (1, 2): UNDIRECTED,
                                  (0, 2): NON_ADJACENT})
    assert kg.mark(1, 0) == EdgeMark.directed(0, 1)
    assert kg.is_known(0, 1) and not kg.is_known(1, 2)
    assert kg.known_count() == 2
    assert kg.unknown_pairs() == [(1, 2)]
    assert kg.directed_edges() == [(0, 1)]
    assert kg.pair_bits(1, 2) == FORWARD | BACKWARD
    assert kg.pair_bits(0, 2) == ABSENT


def test_knowledge_graph_rejects_directed_cycle():
    with pytest.raises(ConflictError):
        KnowledgeGraph.build(3, {(0, 1): EdgeMark.directed(0, 1), (1, 2): EdgeMark.directed(1, 2),
                                 (0, 2): EdgeMark.directed(2, 0)})


def test_knowledge_graph_rejects_bad_pairs():
    with pytest.raises(InputError):
        KnowledgeGraph.build(2, {(0, 0): UNDIRECTED})
    with pytest.raises(InputError):
        KnowledgeGraph.build(2, {(0, 1): EdgeMark.directed(0, 2)})


def test_combine_reports_experiment():
    a = KnowledgeGraph.build(2, {(0, 1): EdgeMark.directed(0, 1)})
    b = KnowledgeGraph.build(2, {(0, 1): NON_ADJACENT})
    with pytest.raises(ConflictError) as info:
        a.combine(b, experiment=4)
    assert info.value.experiment == 4 and info.value.pair == (0, 1)


@given(dags)
def test_from_dag_is_fully_known(g):
    kg = KnowledgeGraph.from_dag(g)
    assert not any(kg.unknown)
    assert kg.directed_edges() == g.edges


@given(dags, st.randoms())
def test_relabel_preserves_marks(g, rnd):
    kg = KnowledgeGraph.from_dag(g)
    perm = list(range(g.n))
    rnd.shuffle(perm)
    r = kg.relabel(perm)
    for a, b in g.edges:
        assert r.mark(perm[a], perm[b]) == EdgeMark.directed(perm[a], perm[b])
    assert r.names[perm[0]] == kg.names[0]


@settings(max_examples=150)
@given(st.integers(1, 7), st.data())
def test_maximal_cliques_brute_force(n, data):
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    chosen = data.draw(st.sets(st.sampled_from(pairs))) if pairs else set()
    adj = [0] * n
    for a, b in chosen:
        adj[a] |= 1 << b
        adj[b] |= 1 << a
    got = {frozenset(v for v in range(n) if c >> v & 1) for c in maximal_cliques(adj)}
    assert got == set(maximal_cliques_naive(adj, n))


def test_unknown_cliques_ignore_singletons(five_ome):
    assert maximal_cliques_unknown(five_ome) == [frozenset({0, 1, 2}), frozenset({1, 2, 3}),
                                                 frozenset({3, 4})]
    assert max_unknown_clique_size(five_ome) == 3
    full = KnowledgeGraph.from_dag(Dag.from_edges(3, [(0, 1)]))
    assert maximal_cliques_unknown(full) == []
    assert max_unknown_clique_size(full) == 1


def test_to_mask_range():
    assert to_mask([0, 3]) == 0b1001
    with pytest.raises(InputError):
        to_mask([5], 3)


def test_mark_kinds_have_operator_values():
    assert [k.value for k in MarkKind] == ["->", "--", "~>", "!!", "??"]
