"""Interactive planning session with a human acting as the oracle.

The user reports, per pair, whether the two variables stayed dependent
(``A dep B``) or came out independent (``A indep B``) in the experiment.
Every accepted transition is written to a log that :func:`replay` turns back
into the final knowledge graph.
"""

from __future__ import annotations

from dataclasses import replace
from typing import IO, Iterable

from .equivalence import is_unique, meek_closure
from .errors import ConflictError, InputError, ParseError
from .formats import dump_kg, kg_delta, parse_kg
from .graphs import NO_KNOWLEDGE, NON_ADJACENT, UNDIRECTED, EdgeMark, KnowledgeGraph
from .planner import PlannerConfig, optinter
from .simulation import derive_seed

HELP = """commands:
  intervene [A B ...]   start an experiment (no names: use the proposal)
  A dep B | A indep B   report the outcome for one pair
  done                  finish the experiment and get a new proposal
  show                  print the current knowledge graph
  quit                  leave the session"""


def verdict_mark(kg: KnowledgeGraph, intervened: frozenset[int], a: int, b: int,
                 dependent: bool) -> EdgeMark:
    """What a dependence verdict on ``{a, b}`` says about the pair."""
    a_in, b_in = a in intervened, b in intervened
    if a_in and b_in:
        return NO_KNOWLEDGE
    if a_in or b_in:
        x, y = (a, b) if a_in else (b, a)
        return EdgeMark.directed(x, y) if dependent else EdgeMark.semi_directed(y, x)
    return UNDIRECTED if dependent else NON_ADJACENT


class Session:
    def __init__(self, kg: KnowledgeGraph, cfg: PlannerConfig = PlannerConfig(),
                 log: IO[str] | None = None):
        self.kg = kg
        self.cfg = cfg
        self.log = log
        self.round = 0
        self.intervention: frozenset[int] | None = None
        self._write(dump_kg(kg).rstrip("\n"))

    def _write(self, *lines):
        if self.log is not None:
            for line in lines:
                self.log.write(line + "\n")
            self.log.flush()

    def _index(self, name):
        try:
            return self.kg.names.index(name)
        except ValueError:
            raise InputError(f"unknown vertex {name!r}") from None

    @property
    def unique(self) -> bool:
        return is_unique(self.kg)

    def proposal(self) -> frozenset[int]:
        cfg = replace(self.cfg, seed=derive_seed(self.cfg.seed, self.round))
        return optinter(self.kg, cfg)

    def intervene(self, names: Iterable[str] | None = None) -> frozenset[int]:
        if names is None:
            chosen = self.proposal()
        else:
            chosen = frozenset(self._index(v) for v in names)
        self.intervention = chosen
        self._write("> intervene: " + " ".join(self.kg.names[v] for v in sorted(chosen)))
        return chosen

    def answer(self, a: str, verdict: str, b: str) -> list[str]:
        """Apply one verdict; on conflict the state is left untouched."""
        if verdict not in ("dep", "indep"):
            raise InputError(f"verdict must be 'dep' or 'indep', not {verdict!r}")
        i, j = self._index(a), self._index(b)
        if i == j:
            raise InputError("a pair needs two different vertices")
        if self.intervention is None:
            self.intervene()
        mark = verdict_mark(self.kg, self.intervention, i, j, verdict == "dep")
        if mark == NO_KNOWLEDGE:
            raise InputError(f"{a} and {b} were both intervened on; their outcome says nothing")
        line = f"{a} {verdict} {b}"
        try:
            single = KnowledgeGraph.build(self.kg.n, {(i, j): mark}, self.kg.names)
            new = meek_closure(self.kg.combine(single, experiment=self.round))
        except ConflictError as exc:
            old = self.kg.mark(i, j)
            self._write(f"# rejected: {line} ({exc})")
            raise ConflictError(f"{line} conflicts with {old} on ({a}, {b}): {exc}",
                                pair=(i, j), old=old, new=mark, experiment=self.round) from None
        delta = kg_delta(self.kg, new)
        self.kg = new
        self._write(f"> answer: {line}", *delta)
        return delta

    def done(self) -> None:
        self.intervention = None
        self.round += 1


def replay(text: str) -> KnowledgeGraph:
    """Rebuild the final knowledge graph from a session log."""
    lines = text.splitlines()
    head = []
    while lines and not lines[0].startswith(">"):
        head.append(lines.pop(0))
    session = Session(parse_kg("\n".join(head)))
    pending = None

    def check():
        if pending is not None and pending[1] != pending[2]:
            raise ParseError(f"logged delta {pending[2]} does not match replayed {pending[1]}",
                             pending[0])

    offset = len(head)
    for number, line in enumerate(lines, start=offset + 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if stripped.startswith("> intervene:"):
            check()
            pending = None
            if session.intervention is not None:
                session.done()
            session.intervene(stripped.split(":", 1)[1].split())
        elif stripped.startswith("> answer:"):
            check()
            words = stripped.split(":", 1)[1].split()
            if len(words) != 3:
                raise ParseError(f"bad answer line {stripped!r}", number)
            pending = (number, session.answer(*words), [])
        elif pending is not None:
            pending[2].append(stripped)
        else:
            raise ParseError(f"unexpected line {stripped!r}", number)
    check()
    return session.kg


def run_interactive(kg: KnowledgeGraph, cfg: PlannerConfig, stdin: IO[str], stdout: IO[str],
                    log: IO[str] | None = None) -> KnowledgeGraph:
    session = Session(kg, cfg, log)

    def say(text=""):
        stdout.write(text + "\n")
        stdout.flush()

    def propose():
        if session.unique:
            return
        names = " ".join(kg.names[v] for v in sorted(session.proposal()))
        say(f"proposed intervention: {names or '(none)'}")

    say(dump_kg(session.kg).rstrip("\n"))
    if session.unique:
        say("unique")
        return session.kg
    propose()
    for raw in stdin:
        words = raw.split()
        if not words:
            continue
        cmd = words[0]
        try:
            if cmd == "quit":
                break
            elif cmd == "help":
                say(HELP)
            elif cmd == "show":
                say(dump_kg(session.kg).rstrip("\n"))
            elif cmd == "intervene":
                if session.intervention is not None:
                    session.done()
                chosen = session.intervene(words[1:] or None)
                say("intervening on: " + " ".join(kg.names[v] for v in sorted(chosen)))
            elif cmd == "done":
                session.done()
                say(dump_kg(session.kg).rstrip("\n"))
                propose()
            elif len(words) == 3 and words[1] in ("dep", "indep"):
                delta = session.answer(*words)
                for line in delta:
                    say(f"  learned: {line}")
                if session.unique:
                    say(dump_kg(session.kg).rstrip("\n"))
                    say("unique")
                    break
            else:
                say(f"unrecognised input {raw.strip()!r}; type 'help'")
        except ConflictError as exc:
            say(f"conflict: {exc}; answer discarded")
        except InputError as exc:
            say(f"error: {exc}")
    return session.kg
