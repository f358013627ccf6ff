"""Intervention-set selection: OPTINTER, bounds, and baseline planners."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Sequence

from .errors import InputError
from .graphs import KnowledgeGraph, bits, to_set, unknown_clique_masks

TIE_BREAKS = ("random", "lowest")


@dataclass(frozen=True)
class PlannerConfig:
    """``max_inter=None`` means no cap on the intervention-set size.

    ``tie_break="lowest"`` replaces the seeded random choice among equally
    good vertices by the lowest ``priority`` (vertex index by default).
    """

    max_inter: int | None = None
    seed: int = 0
    post_process: bool = True
    tie_break: str = "random"
    priority: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.max_inter is not None and self.max_inter < 1:
            raise InputError("max_inter must be at least 1")
        if self.tie_break not in TIE_BREAKS:
            raise InputError(f"tie_break must be one of {TIE_BREAKS}")


def threshold_h(cmax: int) -> int:
    """Largest power of two strictly below ``cmax``: 2**(ceil(log2 cmax) - 1)."""
    if cmax < 2:
        raise InputError("threshold needs a clique of at least two vertices")
    return 1 << ((cmax - 1).bit_length() - 1)


def ceil_log2(k: int) -> int:
    return (k - 1).bit_length() if k > 1 else 0


def conjectured_bound(kg: KnowledgeGraph) -> int:
    """ceil(log2 |C_max|) over the unknown-edge cliques; 0 if there are none."""
    cliques = unknown_clique_masks(kg)
    return ceil_log2(cliques[0].bit_count()) if cliques else 0


def full_space_bound(n: int) -> int:
    """floor(log2 n) + 1: worst case when nothing at all is known."""
    if n < 1:
        raise InputError("n must be positive")
    return n.bit_length()


def single_intervention_bound(kg: KnowledgeGraph) -> int:
    """Sum of (|C| - 1) over a greedy packing of disjoint unknown cliques.

    Cliques are taken largest first, ties by lowest vertex indices.
    """
    used = 0
    total = 0
    for c in unknown_clique_masks(kg):
        if not c & used:
            used |= c
            total += c.bit_count() - 1
    return total


@dataclass
class Selection:
    vertex: int
    clique: frozenset[int]
    counts: dict[int, int]
    post_process: bool = False


@dataclass
class Plan:
    """Outcome of one OPTINTER call with the bookkeeping behind it."""

    intervention: frozenset[int]
    h: int | None = None
    cliques: list[frozenset[int]] = field(default_factory=list)
    relevant: list[frozenset[int]] = field(default_factory=list)
    unresolved: list[frozenset[int]] = field(default_factory=list)
    steps: list[Selection] = field(default_factory=list)

    @property
    def core(self) -> frozenset[int]:
        """The vertices chosen before post-processing."""
        return frozenset(s.vertex for s in self.steps if not s.post_process)


class _Chooser:
    def __init__(self, cfg: PlannerConfig, n: int):
        self.rank = cfg.priority if cfg.priority is not None else tuple(range(n))
        if len(self.rank) != n:
            raise InputError("priority must rank every vertex")
        self.rng = random.Random(cfg.seed) if cfg.tie_break == "random" else None

    def clique_key(self, mask):
        return tuple(sorted(self.rank[v] for v in bits(mask)))

    def pick(self, counts: dict[int, int]) -> int:
        best = max(counts.values())
        ties = sorted((v for v, c in counts.items() if c == best), key=self.rank.__getitem__)
        if self.rng is None or len(ties) == 1:
            return ties[0]
        return ties[self.rng.randrange(len(ties))]


def optinter_plan(kg: KnowledgeGraph, cfg: PlannerConfig = PlannerConfig()) -> Plan:
    """Greedy intervention-set selection over unknown-edge cliques.

    Every clique larger than ``h`` (the largest power of two below the
    biggest clique) should end up with at least ``|C| - h`` and at most ``h``
    intervened vertices, so that no unknown clique bigger than ``h``
    survives the experiment.  Vertices shared by many such cliques are
    preferred.
    """
    choose = _Chooser(cfg, kg.n)
    cap = cfg.max_inter if cfg.max_inter is not None else kg.n
    cliques = unknown_clique_masks(kg)
    cliques.sort(key=lambda c: (-c.bit_count(), choose.clique_key(c)))
    plan = Plan(frozenset(), cliques=[to_set(c) for c in cliques])
    if not cliques:
        return plan

    h = threshold_h(cliques[0].bit_count())
    relevant = [c for c in cliques if c.bit_count() > h]
    need = [c.bit_count() - h for c in relevant]
    resolved = [False] * len(relevant)
    admissible = (1 << kg.n) - 1
    chosen = 0
    plan.h = h
    plan.relevant = [to_set(c) for c in relevant]

    def place(v, clique, counts, post=False):
        nonlocal chosen, admissible
        chosen |= 1 << v
        plan.steps.append(Selection(v, to_set(clique), counts, post))
        for k, c in enumerate(relevant):
            hit = (c & chosen).bit_count()
            if hit == need[k]:
                resolved[k] = True
            if hit == h:
                admissible &= ~(c & ~chosen)

    def unresolved_counts(candidates):
        return {v: sum(1 for k, c in enumerate(relevant) if not resolved[k] and c >> v & 1)
                for v in bits(candidates)}

    while chosen.bit_count() < cap:
        order = sorted(range(len(relevant)), key=lambda k: (
            -relevant[k].bit_count(), -(relevant[k] & ~admissible).bit_count(),
            choose.clique_key(relevant[k])))
        progressed = False
        for k in order:
            if resolved[k]:
                continue
            current = relevant[k]
            while (chosen.bit_count() < cap
                   and (current & chosen).bit_count() < need[k]):
                candidates = current & admissible & ~chosen
                if not candidates:
                    break
                counts = unresolved_counts(candidates)
                place(choose.pick(counts), current, counts)
                progressed = True
            if progressed:
                break
        if not progressed:
            break

    if cfg.post_process:
        _post_process(cliques, relevant, need, choose, cap, place,
                      lambda: chosen, lambda: admissible)

    plan.intervention = to_set(chosen)
    plan.unresolved = [to_set(c) for k, c in enumerate(relevant) if not resolved[k]]
    return plan


def _post_process(cliques, relevant, need, choose, cap, place, chosen, admissible):
    """Add vertices that split further cliques without breaking any cap.

    A relevant clique may not go past ``|C| - h`` intervened vertices, and a
    smaller clique of size ``s`` is treated with its own threshold
    ``h_s``: aim for ``s - h_s`` intervened, never more than ``h_s`` (for a
    two-vertex clique: exactly one endpoint).
    """
    rel = set(relevant)
    others = [c for c in cliques if c not in rel]
    own_h = [threshold_h(c.bit_count()) for c in others]

    def allowed(v):
        mask = chosen()
        if not admissible() >> v & 1:
            return False
        for k, c in enumerate(relevant):
            if c >> v & 1 and (c & mask).bit_count() >= need[k]:
                return False
        for c, hc in zip(others, own_h):
            if c >> v & 1 and (c & mask).bit_count() >= hc:
                return False
        return True

    while chosen().bit_count() < cap:
        mask = chosen()
        short = [c for c, hc in zip(others, own_h)
                 if (c & mask).bit_count() < c.bit_count() - hc]
        added = False
        for c in short:
            candidates = [v for v in bits(c & ~mask) if allowed(v)]
            if not candidates:
                continue
            counts = {v: sum(1 for d in short if d >> v & 1) for v in candidates}
            place(choose.pick(counts), c, counts, post=True)
            added = True
            break
        if not added:
            break


def optinter(kg: KnowledgeGraph, cfg: PlannerConfig = PlannerConfig()) -> frozenset[int]:
    return optinter_plan(kg, cfg).intervention


def _unknown_vertices(kg):
    return [v for v in range(kg.n) if kg.unknown[v]]


def baseline_random(kg: KnowledgeGraph, cfg: PlannerConfig = PlannerConfig()) -> frozenset[int]:
    """Uniform random half of the vertices that touch an unknown edge."""
    pool = _unknown_vertices(kg)
    size = len(pool) // 2
    if cfg.max_inter is not None:
        size = min(size, cfg.max_inter)
    return frozenset(random.Random(cfg.seed).sample(pool, size))


def _cut_size(adj, side):
    return sum((adj[v] & ~side).bit_count() for v in bits(side))


def local_max_cut(adj: Sequence[int], vertices: Sequence[int], rng: random.Random,
                  restarts: int = 8) -> int:
    """Best single-flip local optimum over random starts; returns one side."""
    best_side, best_cut = 0, -1
    for _ in range(max(1, restarts)):
        side = 0
        for v in vertices:
            if rng.random() < 0.5:
                side |= 1 << v
        improved = True
        while improved:
            improved = False
            for v in vertices:
                same = adj[v] & side if side >> v & 1 else adj[v] & ~side
                other = adj[v] & ~same
                if same.bit_count() > other.bit_count():
                    side ^= 1 << v
                    improved = True
        cut = _cut_size(adj, side)
        if cut > best_cut:
            best_side, best_cut = side, cut
    return best_side


def baseline_maxcut(kg: KnowledgeGraph, cfg: PlannerConfig = PlannerConfig(),
                    restarts: int = 8) -> frozenset[int]:
    """Smaller side of a local-search max cut of the unknown-edge graph."""
    pool = _unknown_vertices(kg)
    if not pool:
        return frozenset()
    rng = random.Random(cfg.seed)
    side = local_max_cut(kg.unknown, pool, rng, restarts)
    everything = 0
    for v in pool:
        everything |= 1 << v
    rest = everything & ~side
    # smaller side; on a tie, the side holding the lowest vertex
    if side.bit_count() != rest.bit_count():
        small = min(side, rest, key=int.bit_count)
    else:
        small = side if side >> pool[0] & 1 else rest
    chosen = sorted(bits(small))
    if cfg.max_inter is not None and len(chosen) > cfg.max_inter:
        chosen = sorted(rng.sample(chosen, cfg.max_inter))
    return frozenset(chosen)


PLANNERS = {
    "optinter": optinter,
    "random": baseline_random,
    "maxcut": baseline_maxcut,
}


def get_planner(name: str):
    try:
        return PLANNERS[name]
    except KeyError:
        raise InputError(f"unknown planner {name!r}; choose from {sorted(PLANNERS)}") from None

