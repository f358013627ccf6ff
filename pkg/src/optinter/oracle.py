"""Conditional-independence oracle backed by d-separation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .errors import InputError
from .graphs import Dag, bits, manipulate, to_mask


def _ancestral_closure(g: Dag, mask: int) -> int:
    seen = mask
    frontier = mask
    while frontier:
        nxt = 0
        for v in bits(frontier):
            nxt |= g.parents[v]
        frontier = nxt & ~seen
        seen |= frontier
    return seen


def reachable(g: Dag, x: int, given: int) -> int:
    """Vertices d-connected to ``x`` given the conditioning mask ``given``.

    Bayes-ball traversal over (vertex, direction) states.  "up" means the
    trail arrived from a child, "down" that it arrived from a parent.
    """
    anc = _ancestral_closure(g, given)
    up, down = 1 << x, 0
    seen_up, seen_down = up, 0
    while up or down:
        next_up = next_down = 0
        for v in bits(up & ~given):
            next_up |= g.parents[v]
            next_down |= g.children[v]
        for v in bits(down):
            if not given >> v & 1:
                next_down |= g.children[v]
            if anc >> v & 1:
                next_up |= g.parents[v]
        up = next_up & ~seen_up
        down = next_down & ~seen_down
        seen_up |= up
        seen_down |= down
    return (seen_up | seen_down) & ~given & ~(1 << x)


def _check_query(n, x, y, s_mask):
    if not (0 <= x < n and 0 <= y < n):
        raise InputError(f"vertices ({x}, {y}) out of range")
    if x == y:
        raise InputError("x and y must differ")
    if (s_mask >> x | s_mask >> y) & 1:
        raise InputError("x and y must not be in the conditioning set")


def d_separated(g: Dag, x: int, y: int, given: Iterable[int] = ()) -> bool:
    s_mask = given if isinstance(given, int) else to_mask(given, g.n)
    _check_query(g.n, x, y, s_mask)
    return not reachable(g, x, s_mask) >> y & 1


@dataclass(frozen=True)
class CiOracle:
    """Answers independence queries about ``truth`` under an intervention.

    Planners should only call :meth:`query` and :meth:`adjacent`; ``truth``
    is there for the experiment harness.
    """

    truth: Dag
    intervened: frozenset[int] = frozenset()
    manipulated: Dag = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        intervened = frozenset(self.intervened)
        object.__setattr__(self, "intervened", intervened)
        object.__setattr__(self, "manipulated", manipulate(self.truth, intervened))

    @property
    def n(self) -> int:
        return self.truth.n

    @property
    def names(self):
        return self.truth.names

    def query(self, x: int, y: int, given: Iterable[int] = ()) -> bool:
        """True iff ``x`` and ``y`` are independent given ``given``."""
        return d_separated(self.manipulated, x, y, given)

    def adjacent(self, x: int, y: int) -> bool:
        """True iff no conditioning set separates ``x`` and ``y``.

        Uses the graphical shortcut: under a faithful oracle this is exactly
        edge presence in the manipulated graph.
        """
        if x == y:
            raise InputError("x and y must differ")
        return self.manipulated.adjacent(x, y)

    def with_intervention(self, intervened: Iterable[int]) -> "CiOracle":
        return CiOracle(self.truth, frozenset(intervened))
