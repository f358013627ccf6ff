"""Equivalence classes: patterns from an oracle, Meek closure, experiment
updates, and brute-force enumeration used to cross-check all of it."""

from __future__ import annotations

import functools
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Iterator

from .errors import ConflictError, EnumerationGuardError, InputError
from .graphs import (ABSENT, ANY, BACKWARD, FORWARD, Dag, KnowledgeGraph, bits,
                     manipulate, to_mask)
from .oracle import CiOracle, d_separated

ENUMERATION_GUARD = 6
MEMBERS_GUARD = 12


@dataclass(frozen=True)
class ExperimentResult:
    """Marks learned from one experiment, before combining with prior knowledge.

    ``derived`` holds the direct per-pair marks and the colliders among
    non-intervened triples; ``inferred`` holds only the colliders whose middle
    vertex is passive but which have an intervened endpoint.
    """

    intervened: frozenset[int]
    derived: KnowledgeGraph
    inferred: KnowledgeGraph


def find_separating_set(oracle: CiOracle, x: int, y: int, adjacency) -> int | None:
    """First conditioning mask that separates ``x`` and ``y``, PC-style.

    Candidates are subsets of the neighbours of ``x`` and then of ``y`` in the
    observed skeleton, smallest first.  A faithful oracle always has a
    separating set among the parents of one endpoint, so for a non-adjacent
    pair this never returns ``None``.
    """
    cand_x = list(bits(adjacency[x] & ~(1 << y)))
    cand_y = list(bits(adjacency[y] & ~(1 << x)))
    for size in range(max(len(cand_x), len(cand_y)) + 1):
        for cand in (cand_x, cand_y):
            if size > len(cand):
                continue
            for subset in combinations(cand, size):
                mask = 0
                for v in subset:
                    mask |= 1 << v
                if oracle.query(x, y, mask):
                    return mask
    return None


def _set_pair(arrows, gaps, i, j, b):
    if b & ABSENT:
        gaps[i] |= 1 << j
        gaps[j] |= 1 << i
    else:
        gaps[i] &= ~(1 << j)
        gaps[j] &= ~(1 << i)
    arrows[i] = arrows[i] | 1 << j if b & FORWARD else arrows[i] & ~(1 << j)
    arrows[j] = arrows[j] | 1 << i if b & BACKWARD else arrows[j] & ~(1 << i)


def _get_pair(arrows, gaps, i, j):
    return ((gaps[i] >> j & 1) * ABSENT | (arrows[i] >> j & 1) * FORWARD
            | (arrows[j] >> i & 1) * BACKWARD)


def _arrow_bits(src, dst):
    return FORWARD if src < dst else BACKWARD


def experiment_marks(kg: KnowledgeGraph, intervened: Iterable[int],
                     oracle: CiOracle) -> ExperimentResult:
    """Marks implied by one experiment on its own.

    * one endpoint ``x`` intervened: adjacency means ``x -> y``; otherwise
      ``x -> y`` is refuted and ``y -> x`` is invisible, so ``y ~> x``
    * neither intervened: undirected or non-adjacent
    * both intervened: nothing is learned
    * unshielded colliders among non-intervened triples are oriented

    Separately, colliders ``x -> z <- y`` of the manipulated graph with ``z``
    passive but ``x`` or ``y`` intervened go to ``inferred``: only in-edges of
    intervened vertices are cut, so both arrows are real edges of the truth.

    ``kg`` is only consulted to skip collider tests whose outcome is already
    known.
    """
    n = kg.n
    imask = to_mask(intervened, n)
    if oracle.intervened != frozenset(bits(imask)):
        raise InputError("oracle intervention set does not match the experiment")
    adjacency = [0] * n
    arrows, gaps = [0] * n, [0] * n
    for i in range(n):
        i_in = imask >> i & 1
        for j in range(i + 1, n):
            j_in = imask >> j & 1
            adjacent = oracle.adjacent(i, j)
            if adjacent:
                adjacency[i] |= 1 << j
                adjacency[j] |= 1 << i
            if i_in and j_in:
                b = ANY
            elif i_in:
                b = FORWARD if adjacent else ABSENT | BACKWARD
            elif j_in:
                b = BACKWARD if adjacent else ABSENT | FORWARD
            else:
                b = FORWARD | BACKWARD if adjacent else ABSENT
            _set_pair(arrows, gaps, i, j, b)

    extra_arrows = [(1 << n) - 1 & ~(1 << i) for i in range(n)]
    extra_gaps = list(extra_arrows)
    sepsets = {}
    for z in range(n):
        if imask >> z & 1:
            continue
        nbrs = list(bits(adjacency[z]))
        for x, y in combinations(nbrs, 2):
            if adjacency[x] >> y & 1:
                continue
            into_x = _arrow_bits(x, z)
            into_y = _arrow_bits(y, z)
            lo_x, hi_x = min(x, z), max(x, z)
            lo_y, hi_y = min(y, z), max(y, z)
            known_x = kg.pair_bits(lo_x, hi_x) & _get_pair(arrows, gaps, lo_x, hi_x)
            known_y = kg.pair_bits(lo_y, hi_y) & _get_pair(arrows, gaps, lo_y, hi_y)
            if known_x == into_x and known_y == into_y:
                continue
            if (x, y) not in sepsets:
                sepsets[x, y] = find_separating_set(oracle, x, y, adjacency)
            sep = sepsets[x, y]
            if sep is None:
                raise ConflictError(f"no separating set for non-adjacent pair ({x}, {y})",
                                    pair=(x, y))
            if not sep >> z & 1:
                passive = not (imask >> x | imask >> y) & 1
                target = (arrows, gaps) if passive else (extra_arrows, extra_gaps)
                for lo, hi, arrow in ((lo_x, hi_x, into_x), (lo_y, hi_y, into_y)):
                    b = _get_pair(*target, lo, hi) & arrow
                    if not b:
                        raise ConflictError(f"collider at {z} contradicts pair ({lo}, {hi})",
                                            pair=(lo, hi))
                    _set_pair(*target, lo, hi, b)
    derived = KnowledgeGraph(n, tuple(arrows), tuple(gaps), kg.names)
    inferred = KnowledgeGraph(n, tuple(extra_arrows), tuple(extra_gaps), kg.names)
    return ExperimentResult(frozenset(bits(imask)), derived, inferred)


def update_knowledge(kg: KnowledgeGraph, intervened: Iterable[int], oracle: CiOracle,
                     experiment=None) -> KnowledgeGraph:
    """Refine ``kg`` with the outcome of one experiment, then close under Meek rules."""
    result = experiment_marks(kg, intervened, oracle)
    merged = kg.combine(result.derived, experiment=experiment)
    return meek_closure(merged.combine(result.inferred, experiment=experiment))


def pattern_from_oracle(oracle: CiOracle) -> KnowledgeGraph:
    """Pattern (CPDAG) of the observational equivalence class of the truth."""
    if oracle.intervened:
        raise InputError("pattern_from_oracle needs an observational oracle")
    empty = KnowledgeGraph.build(oracle.n, names=oracle.names)
    return update_knowledge(empty, (), oracle)


def _meek_fires(a, b, und, par, ch, na, adj):
    """Does one of the four Meek rules orient the undirected edge a - b as a -> b?"""
    if par[a] & na[b]:
        return True
    if ch[a] & par[b]:
        return True
    t = und[a] & par[b]
    for c in bits(t):
        if t & na[c]:
            return True
    for d in bits(und[a] & na[b]):
        if ch[d] & par[b] & adj[a]:
            return True
    return False


def meek_closure(kg: KnowledgeGraph) -> KnowledgeGraph:
    """Apply Meek's four orientation rules to undirected marks until fixpoint.

    Semi-directed and no-knowledge marks are left alone; Meek rules need the
    adjacency to be known.
    """
    n = kg.n
    arrows = list(kg.arrows)
    und = list(kg.undirected)
    par = list(kg.parents)
    ch = list(kg.children)
    na = kg.nonadjacent
    adj = [ch[i] | par[i] | und[i] for i in range(n)]
    changed = True
    while changed:
        changed = False
        for a in range(n):
            for b in bits(und[a]):
                if not und[a] >> b & 1:
                    continue
                if _meek_fires(a, b, und, par, ch, na, adj):
                    arrows[b] &= ~(1 << a)
                    und[a] &= ~(1 << b)
                    und[b] &= ~(1 << a)
                    ch[a] |= 1 << b
                    par[b] |= 1 << a
                    changed = True
    if arrows == list(kg.arrows):
        return kg
    # a newly oriented edge may not complete an unshielded collider
    for b in range(n):
        for a in bits(par[b] & ~kg.parents[b]):
            clash = par[b] & na[a]
            if clash:
                c = next(bits(clash))
                raise ConflictError(
                    f"orientation {kg.names[a]} -> {kg.names[b]} creates a new "
                    f"v-structure with {kg.names[c]}", pair=(min(a, b), max(a, b)))
    return KnowledgeGraph(n, tuple(arrows), kg.gaps, kg.names)


def is_unique(kg: KnowledgeGraph) -> bool:
    """Every mark known; acyclicity is guaranteed by construction."""
    return not any(kg.unknown)


def _check_guard(n, guard):
    if n > guard:
        raise EnumerationGuardError(f"refusing to enumerate over {n} vertices (guard {guard})")


def _extend(n, pairs, choices, names, forbid_collider=None):
    """Backtracking over per-pair options, pruning directed cycles."""
    parents = [0] * n
    anc = [0] * n  # strict ancestors

    def add(a, b):
        # a -> b; everything at or below b gains a and its ancestors
        gain = anc[a] | 1 << a
        saved = list(anc)
        for v in range(n):
            if v == b or anc[v] >> b & 1:
                anc[v] |= gain
        parents[b] |= 1 << a
        return saved

    def rec(k):
        nonlocal anc
        if k == len(pairs):
            if forbid_collider is None or not forbid_collider(parents):
                yield Dag(n, tuple(parents), names)
            return
        i, j = pairs[k]
        for option in choices[k]:
            if option == ABSENT:
                yield from rec(k + 1)
                continue
            a, b = (i, j) if option == FORWARD else (j, i)
            if anc[a] >> b & 1:
                continue
            saved = add(a, b)
            yield from rec(k + 1)
            parents[b] &= ~(1 << a)
            anc = saved

    return rec(0)


def enumerate_dags(n: int, guard: int = ENUMERATION_GUARD) -> Iterator[Dag]:
    """Every labelled DAG on ``n`` vertices, each exactly once."""
    if n < 0:
        raise InputError("vertex count must be non-negative")
    _check_guard(n, guard)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    choices = [(ABSENT, FORWARD, BACKWARD)] * len(pairs)
    return _extend(n, pairs, choices, None)


def members(kg: KnowledgeGraph, guard: int = MEMBERS_GUARD,
            structural_only: bool = False) -> list[Dag]:
    """DAGs consistent with every mark of ``kg``.

    Directed marks are edges, non-adjacent marks are non-edges, undirected
    marks are edges in either direction, ``x ~> y`` is a non-edge or
    ``x -> y``.  Unless ``structural_only`` is set, an undirected mark also
    promises the edge is not part of an unshielded collider, which is what
    undirected means in a pattern (otherwise the chain ``X - Y - Z`` would
    admit ``X -> Y <- Z``).
    """
    _check_guard(kg.n, guard)
    n = kg.n
    pairs, choices = [], []
    fixed = []
    for i in range(n):
        for j in range(i + 1, n):
            b = kg.pair_bits(i, j)
            opts = tuple(o for o in (ABSENT, FORWARD, BACKWARD) if b & o)
            if len(opts) == 1:
                fixed.append((i, j, opts[0]))
            else:
                pairs.append((i, j))
                choices.append(opts)
    # fixed arrows first: fewer dead branches
    order = [(i, j) for i, j, o in fixed if o != ABSENT] + pairs
    order_choices = [(o,) for _, _, o in fixed if o != ABSENT] + choices

    forbid = None
    if not structural_only:
        und = kg.undirected

        def forbid(parents):
            for b in range(n):
                pb = parents[b]
                for a in bits(pb & und[b]):
                    others = pb & ~(1 << a)
                    for c in bits(others):
                        if not (parents[a] >> c & 1 or parents[c] >> a & 1):
                            return True
            return False

    return list(_extend(n, order, order_choices, kg.names, forbid))


def _separation_queries(n):
    out = []
    for x in range(n):
        for y in range(x + 1, n):
            others = [v for v in range(n) if v not in (x, y)]
            for size in range(len(others) + 1):
                for subset in combinations(others, size):
                    out.append((x, y, to_mask(subset)))
    return out


def ci_signature(g: Dag, intervened: Iterable[int] = ()) -> int:
    """Bitmap of every d-separation fact of the (manipulated) graph."""
    h = manipulate(g, intervened) if intervened else g
    sig = 0
    for k, (x, y, s) in enumerate(_separation_queries(g.n)):
        if d_separated(h, x, y, s):
            sig |= 1 << k
    return sig


@functools.lru_cache(maxsize=None)
def _classes(n):
    groups = {}
    for g in enumerate_dags(n):
        groups.setdefault(ci_signature(g), []).append(g.parents)
    return groups


def markov_class(truth: Dag, guard: int = ENUMERATION_GUARD) -> list[Dag]:
    """All DAGs with the same d-separation facts as ``truth``."""
    _check_guard(truth.n, guard)
    return [Dag(truth.n, p, truth.names) for p in _classes(truth.n)[ci_signature(truth)]]


def ome_by_enumeration(truth: Dag, guard: int = ENUMERATION_GUARD) -> KnowledgeGraph:
    """Pattern of the class of ``truth``, computed by grouping all DAGs.

    Edges with the same orientation in every member are directed, edges
    present with varying orientation are undirected.
    """
    cls = markov_class(truth, guard)
    n = truth.n
    arrows, gaps = [0] * n, [0] * n
    for i in range(n):
        for j in range(i + 1, n):
            b = 0
            for g in cls:
                if g.has_edge(i, j):
                    b |= FORWARD
                elif g.has_edge(j, i):
                    b |= BACKWARD
                else:
                    b |= ABSENT
            if b & ABSENT and b != ABSENT:
                raise ConflictError("equivalent DAGs disagree on adjacency", pair=(i, j))
            _set_pair(arrows, gaps, i, j, b)
    return KnowledgeGraph(n, tuple(arrows), tuple(gaps), truth.names)
