"""DAGs, knowledge graphs and maximal-clique enumeration.

Vertex sets are plain ``int`` bitmasks internally (bit ``i`` set means vertex
``i`` is a member).  Public functions accept any iterable of vertex indices
and hand back ``frozenset`` objects.

A knowledge graph stores, for every unordered pair ``{i, j}``, which of the
three possible relations are still open: no edge, ``i -> j`` or ``j -> i``.
Each of the five edge marks is one non-empty subset of those three, and two
pieces of knowledge about a pair combine by intersecting the subsets.  An
empty intersection is a conflict.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import ConflictError, InputError

MAX_VERTICES = 64


def bits(mask: int) -> Iterator[int]:
    """Yield the indices of set bits in ascending order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def to_mask(vertices: Iterable[int], n: int | None = None) -> int:
    mask = 0
    for v in vertices:
        if v < 0 or (n is not None and v >= n):
            raise InputError(f"vertex index {v} out of range for {n} vertices")
        mask |= 1 << v
    return mask


def to_set(mask: int) -> frozenset[int]:
    return frozenset(bits(mask))


def default_names(n: int) -> tuple[str, ...]:
    return tuple(f"X{i}" for i in range(n))


def _check_names(names, n):
    if names is None:
        return default_names(n)
    names = tuple(names)
    if len(names) != n:
        raise InputError(f"expected {n} vertex names, got {len(names)}")
    if len(set(names)) != n:
        raise InputError("vertex names must be unique")
    return names


def _acyclic_from_parents(parents: Sequence[int]) -> bool:
    remaining = (1 << len(parents)) - 1
    placed = 0
    while remaining:
        ready = 0
        for v in bits(remaining):
            if parents[v] & ~placed == 0:
                ready |= 1 << v
        if not ready:
            return False
        placed |= ready
        remaining &= ~ready
    return True


def is_acyclic(edges: Iterable[tuple[int, int]], n: int) -> bool:
    """True iff the directed graph on ``n`` vertices has a topological order."""
    parents = [0] * n
    for a, b in edges:
        if not (0 <= a < n and 0 <= b < n):
            raise InputError(f"edge ({a}, {b}) out of range for {n} vertices")
        if a == b:
            return False
        parents[b] |= 1 << a
    return _acyclic_from_parents(parents)


@dataclass(frozen=True)
class Dag:
    """Directed acyclic graph stored as one parent bitmask per vertex."""

    n: int
    parents: tuple[int, ...]
    names: tuple[str, ...] = None
    children: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not 0 <= self.n <= MAX_VERTICES:
            raise InputError(f"vertex count {self.n} outside [0, {MAX_VERTICES}]")
        parents = tuple(self.parents)
        if len(parents) != self.n:
            raise InputError("parents must have one mask per vertex")
        full = (1 << self.n) - 1
        children = [0] * self.n
        for c, pm in enumerate(parents):
            if pm & ~full or pm >> c & 1:
                raise InputError(f"invalid parent set for vertex {c}")
            for p in bits(pm):
                if parents[p] >> c & 1:
                    raise InputError(f"pair ({p}, {c}) appears in both orientations")
                children[p] |= 1 << c
        if not _acyclic_from_parents(parents):
            raise InputError("graph contains a directed cycle")
        object.__setattr__(self, "parents", parents)
        object.__setattr__(self, "names", _check_names(self.names, self.n))
        object.__setattr__(self, "children", tuple(children))

    @classmethod
    def from_edges(cls, n, edges=(), names=None) -> "Dag":
        parents = [0] * n
        for a, b in edges:
            if not (0 <= a < n and 0 <= b < n):
                raise InputError(f"edge ({a}, {b}) out of range for {n} vertices")
            if a == b:
                raise InputError(f"self-loop on vertex {a}")
            parents[b] |= 1 << a
        return cls(n, tuple(parents), names)

    @classmethod
    def complete(cls, order: Sequence[int], names=None) -> "Dag":
        """Complete DAG whose topological order is ``order``."""
        n = len(order)
        edges = [(order[i], order[j]) for i in range(n) for j in range(i + 1, n)]
        return cls.from_edges(n, edges, names)

    @property
    def edges(self) -> list[tuple[int, int]]:
        """Edges in lexicographic order; this is the canonical serialization."""
        return sorted((p, c) for c in range(self.n) for p in bits(self.parents[c]))

    def has_edge(self, a: int, b: int) -> bool:
        return bool(self.parents[b] >> a & 1)

    def adjacent(self, a: int, b: int) -> bool:
        return bool((self.parents[b] | self.children[b]) >> a & 1)

    def neighbors(self, v: int) -> int:
        return self.parents[v] | self.children[v]

    def edge_count(self) -> int:
        return sum(pm.bit_count() for pm in self.parents)

    def descendants(self, v: int) -> int:
        """Bitmask of strict descendants of ``v``."""
        seen = 0
        frontier = self.children[v]
        while frontier:
            seen |= frontier
            nxt = 0
            for u in bits(frontier):
                nxt |= self.children[u]
            frontier = nxt & ~seen
        return seen

    def relabel(self, perm: Sequence[int]) -> "Dag":
        """Vertex ``v`` becomes ``perm[v]``; names travel with their vertex."""
        names = [None] * self.n
        for v, name in enumerate(self.names):
            names[perm[v]] = name
        return Dag.from_edges(self.n, [(perm[a], perm[b]) for a, b in self.edges], names)


def manipulate(g: Dag, intervened: Iterable[int]) -> Dag:
    """Break every edge pointing into an intervened vertex."""
    mask = to_mask(intervened, g.n)
    parents = tuple(0 if mask >> v & 1 else pm for v, pm in enumerate(g.parents))
    return Dag(g.n, parents, g.names)


# possibility bits for an unordered pair (i, j) with i < j
ABSENT = 1
FORWARD = 2
BACKWARD = 4
ANY = ABSENT | FORWARD | BACKWARD


class MarkKind(enum.Enum):
    DIRECTED = "->"
    UNDIRECTED = "--"
    SEMI_DIRECTED = "~>"
    NON_ADJACENT = "!!"
    NO_KNOWLEDGE = "??"


@dataclass(frozen=True)
class EdgeMark:
    """One of the five knowledge-graph edge marks.

    ``source``/``target`` are set for directed and semi-directed marks only.
    For a semi-directed mark the source is the vertex that may be the cause:
    either there is no edge, or ``source -> target``.
    """

    kind: MarkKind
    source: int | None = None
    target: int | None = None

    @classmethod
    def directed(cls, source: int, target: int) -> "EdgeMark":
        return cls(MarkKind.DIRECTED, source, target)

    @classmethod
    def semi_directed(cls, source: int, target: int) -> "EdgeMark":
        return cls(MarkKind.SEMI_DIRECTED, source, target)

    @property
    def known(self) -> bool:
        return self.kind in (MarkKind.DIRECTED, MarkKind.NON_ADJACENT)

    def __str__(self):
        if self.source is None:
            return self.kind.name.lower()
        return f"{self.kind.name.lower()}({self.source}, {self.target})"


UNDIRECTED = EdgeMark(MarkKind.UNDIRECTED)
NON_ADJACENT = EdgeMark(MarkKind.NON_ADJACENT)
NO_KNOWLEDGE = EdgeMark(MarkKind.NO_KNOWLEDGE)


def mark_bits(mark: EdgeMark, i: int, j: int) -> int:
    """Possibility bits of ``mark`` on the pair ``(i, j)``, ``i < j``."""
    kind = mark.kind
    if kind is MarkKind.UNDIRECTED:
        return FORWARD | BACKWARD
    if kind is MarkKind.NON_ADJACENT:
        return ABSENT
    if kind is MarkKind.NO_KNOWLEDGE:
        return ANY
    if {mark.source, mark.target} != {i, j}:
        raise InputError(f"mark {mark} does not belong to pair ({i}, {j})")
    arrow = FORWARD if mark.source == i else BACKWARD
    return arrow if kind is MarkKind.DIRECTED else arrow | ABSENT


def mark_from_bits(b: int, i: int, j: int) -> EdgeMark:
    if b == ANY:
        return NO_KNOWLEDGE
    if b == ABSENT:
        return NON_ADJACENT
    if b == FORWARD | BACKWARD:
        return UNDIRECTED
    if b == FORWARD:
        return EdgeMark.directed(i, j)
    if b == BACKWARD:
        return EdgeMark.directed(j, i)
    if b == ABSENT | FORWARD:
        return EdgeMark.semi_directed(i, j)
    if b == ABSENT | BACKWARD:
        return EdgeMark.semi_directed(j, i)
    raise ValueError(f"no mark for possibility bits {b}")


def _pair_of(*marks):
    pairs = {frozenset((m.source, m.target)) for m in marks if m.source is not None}
    if len(pairs) > 1:
        raise InputError("marks refer to different vertex pairs")
    if pairs:
        return tuple(sorted(pairs.pop()))
    return (0, 1)


def combine_marks(old: EdgeMark, new: EdgeMark) -> EdgeMark:
    """Most informative mark consistent with both ``old`` and ``new``."""
    i, j = _pair_of(old, new)
    b = mark_bits(old, i, j) & mark_bits(new, i, j)
    if not b:
        raise ConflictError(f"{old} contradicts {new}", pair=(i, j), old=old, new=new)
    return mark_from_bits(b, i, j)


@dataclass(frozen=True)
class KnowledgeGraph:
    """Mixed graph with exactly one edge mark per unordered vertex pair.

    ``arrows[i]`` has bit ``j`` set when ``i -> j`` is still possible and
    ``gaps[i]`` has bit ``j`` set when "no edge between i and j" is still
    possible.  Use :meth:`build` to construct from marks.
    """

    n: int
    arrows: tuple[int, ...]
    gaps: tuple[int, ...]
    names: tuple[str, ...] = None

    children: tuple[int, ...] = field(init=False, repr=False, compare=False)
    parents: tuple[int, ...] = field(init=False, repr=False, compare=False)
    undirected: tuple[int, ...] = field(init=False, repr=False, compare=False)
    nonadjacent: tuple[int, ...] = field(init=False, repr=False, compare=False)
    unknown: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n = self.n
        if not 0 <= n <= MAX_VERTICES:
            raise InputError(f"vertex count {n} outside [0, {MAX_VERTICES}]")
        arrows, gaps = tuple(self.arrows), tuple(self.gaps)
        if len(arrows) != n or len(gaps) != n:
            raise InputError("arrows and gaps need one mask per vertex")
        full = (1 << n) - 1
        rev = [0] * n
        for i in range(n):
            if (arrows[i] | gaps[i]) & ~full or (arrows[i] | gaps[i]) >> i & 1:
                raise InputError(f"invalid masks for vertex {i}")
            for j in bits(arrows[i]):
                rev[j] |= 1 << i
        for i in range(n):
            for j in bits(gaps[i]):
                if not gaps[j] >> i & 1:
                    raise InputError("gaps must be symmetric")
        children, parents, und, na, unk = [], [], [], [], []
        for i in range(n):
            others = full & ~(1 << i)
            if (arrows[i] | rev[i] | gaps[i]) != others:
                missing = next(bits(others & ~(arrows[i] | rev[i] | gaps[i])))
                raise ConflictError(
                    f"pair ({i}, {missing}) has no possible relation left",
                    pair=(min(i, missing), max(i, missing)))
            ch = arrows[i] & ~rev[i] & ~gaps[i]
            pa = rev[i] & ~arrows[i] & ~gaps[i]
            nad = gaps[i] & ~arrows[i] & ~rev[i]
            children.append(ch)
            parents.append(pa)
            und.append(arrows[i] & rev[i] & ~gaps[i])
            na.append(nad)
            unk.append(others & ~(ch | pa | nad))
        if not _acyclic_from_parents(parents):
            raise ConflictError("directed marks form a cycle")
        object.__setattr__(self, "arrows", arrows)
        object.__setattr__(self, "gaps", gaps)
        object.__setattr__(self, "names", _check_names(self.names, n))
        object.__setattr__(self, "children", tuple(children))
        object.__setattr__(self, "parents", tuple(parents))
        object.__setattr__(self, "undirected", tuple(und))
        object.__setattr__(self, "nonadjacent", tuple(na))
        object.__setattr__(self, "unknown", tuple(unk))

    @classmethod
    def build(cls, n: int, marks: Mapping[tuple[int, int], EdgeMark] = None,
              names=None, default: EdgeMark = NO_KNOWLEDGE) -> "KnowledgeGraph":
        """Knowledge graph with ``default`` on every pair not in ``marks``."""
        codes = {}
        for (a, b), mark in (marks or {}).items():
            if not (0 <= a < n and 0 <= b < n) or a == b:
                raise InputError(f"invalid pair ({a}, {b}) for {n} vertices")
            i, j = min(a, b), max(a, b)
            if (i, j) in codes:
                raise InputError(f"pair ({i}, {j}) given more than once")
            codes[i, j] = mark_bits(mark, i, j)
        arrows, gaps = [0] * n, [0] * n
        for i in range(n):
            for j in range(i + 1, n):
                b = codes[i, j] if (i, j) in codes else mark_bits(default, i, j)
                if b & ABSENT:
                    gaps[i] |= 1 << j
                    gaps[j] |= 1 << i
                if b & FORWARD:
                    arrows[i] |= 1 << j
                if b & BACKWARD:
                    arrows[j] |= 1 << i
        return cls(n, tuple(arrows), tuple(gaps), names)

    @classmethod
    def from_dag(cls, g: Dag) -> "KnowledgeGraph":
        """Fully known knowledge graph representing ``g`` uniquely."""
        return cls(g.n, g.children, tuple(((1 << g.n) - 1) & ~(1 << v) & ~g.neighbors(v)
                                          for v in range(g.n)), g.names)

    def pair_bits(self, i: int, j: int) -> int:
        if i > j:
            i, j = j, i
        return ((self.gaps[i] >> j & 1) * ABSENT | (self.arrows[i] >> j & 1) * FORWARD
                | (self.arrows[j] >> i & 1) * BACKWARD)

    def mark(self, a: int, b: int) -> EdgeMark:
        if a == b or not (0 <= a < self.n and 0 <= b < self.n):
            raise InputError(f"invalid pair ({a}, {b})")
        i, j = min(a, b), max(a, b)
        return mark_from_bits(self.pair_bits(i, j), i, j)

    def marks(self) -> Iterator[tuple[tuple[int, int], EdgeMark]]:
        """All pairs ``(i, j)``, ``i < j``, in lexicographic order with their mark."""
        for i in range(self.n):
            for j in range(i + 1, self.n):
                yield (i, j), mark_from_bits(self.pair_bits(i, j), i, j)

    def with_marks(self, updates: Mapping[tuple[int, int], EdgeMark]) -> "KnowledgeGraph":
        marks = {pair: m for pair, m in self.marks()}
        for (a, b), m in updates.items():
            marks[min(a, b), max(a, b)] = m
        return KnowledgeGraph.build(self.n, marks, self.names)

    def combine(self, other: "KnowledgeGraph", experiment=None) -> "KnowledgeGraph":
        """Pairwise :func:`combine_marks` of two graphs over the same vertices."""
        if other.n != self.n:
            raise InputError("knowledge graphs differ in vertex count")
        arrows = tuple(a & b for a, b in zip(self.arrows, other.arrows))
        gaps = tuple(a & b for a, b in zip(self.gaps, other.gaps))
        for i in range(self.n):
            for j in range(i + 1, self.n):
                if not (gaps[i] >> j & 1 or arrows[i] >> j & 1 or arrows[j] >> i & 1):
                    old, new = self.mark(i, j), other.mark(i, j)
                    raise ConflictError(
                        f"pair ({self.names[i]}, {self.names[j]}): {old} contradicts {new}",
                        pair=(i, j), old=old, new=new, experiment=experiment)
        return KnowledgeGraph(self.n, arrows, gaps, self.names)

    def is_known(self, a: int, b: int) -> bool:
        return not self.unknown[a] >> b & 1

    def known_count(self) -> int:
        directed = sum(m.bit_count() for m in self.children)
        return directed + sum(m.bit_count() for m in self.nonadjacent) // 2

    def unknown_pairs(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(self.n) for j in bits(self.unknown[i]) if i < j]

    def directed_edges(self) -> list[tuple[int, int]]:
        return sorted((i, j) for i in range(self.n) for j in bits(self.children[i]))

    def relabel(self, perm: Sequence[int]) -> "KnowledgeGraph":
        n = self.n
        names = [None] * n
        for v, name in enumerate(self.names):
            names[perm[v]] = name
        marks = {}
        for (i, j), m in self.marks():
            if m.source is not None:
                m = EdgeMark(m.kind, perm[m.source], perm[m.target])
            marks[perm[i], perm[j]] = m
        return KnowledgeGraph.build(n, marks, names)


def maximal_cliques(adjacency: Sequence[int]) -> list[int]:
    """All maximal cliques of an undirected graph, as bitmasks.

    Bron-Kerbosch with Tomita pivoting; ``adjacency[v]`` is the neighbor mask
    of ``v`` and must not contain ``v`` itself.
    """
    out = []

    def expand(r, p, x):
        if not p and not x:
            out.append(r)
            return
        pivot = max(bits(p | x), key=lambda u: (p & adjacency[u]).bit_count())
        for v in bits(p & ~adjacency[pivot]):
            expand(r | 1 << v, p & adjacency[v], x & adjacency[v])
            p &= ~(1 << v)
            x |= 1 << v

    expand(0, (1 << len(adjacency)) - 1, 0)
    return out


def clique_sort_key(mask: int):
    return (-mask.bit_count(), tuple(bits(mask)))


def unknown_clique_masks(kg: KnowledgeGraph) -> list[int]:
    """Maximal cliques (size >= 2) of the unknown-edge graph, largest first."""
    cliques = [c for c in maximal_cliques(kg.unknown) if c.bit_count() >= 2]
    cliques.sort(key=clique_sort_key)
    return cliques


def maximal_cliques_unknown(kg: KnowledgeGraph) -> list[frozenset[int]]:
    """Maximal cliques of vertices joined by unknown marks.

    Unknown means undirected, semi-directed or no-knowledge.  Isolated
    vertices are left out: they need no intervention.
    """
    return [to_set(c) for c in unknown_clique_masks(kg)]


def max_unknown_clique_size(kg: KnowledgeGraph) -> int:
    cliques = unknown_clique_masks(kg)
    if cliques:
        return cliques[0].bit_count()
    return 1 if kg.n else 0
