"""Line-oriented text formats for knowledge graphs (.kg) and DAGs (.dag).

::

    # comment
    vertices: A B C
    A -> B      directed, A causes B
    B -- C      undirected (adjacent, direction unknown)
    A ~> C      semi-directed: no edge, or A -> C
    A !! C      non-adjacent
    A ?? C      no knowledge (the default for pairs not listed)

A ``.dag`` file uses the same header followed by ``->`` lines only.
"""

from __future__ import annotations

from pathlib import Path

from .errors import InputError, ParseError
from .graphs import NO_KNOWLEDGE, Dag, EdgeMark, KnowledgeGraph, MarkKind

_OPS = {
    "->": MarkKind.DIRECTED,
    "--": MarkKind.UNDIRECTED,
    "~>": MarkKind.SEMI_DIRECTED,
    "!!": MarkKind.NON_ADJACENT,
    "??": MarkKind.NO_KNOWLEDGE,
}


def _content_lines(text):
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line and not line.startswith("#"):
            yield number, line


def _parse(text, allowed):
    lines = _content_lines(text)
    try:
        number, header = next(lines)
    except StopIteration:
        raise ParseError("missing 'vertices:' header", 1) from None
    key, sep, rest = header.partition(":")
    if not sep or key.strip() != "vertices":
        raise ParseError("first line must be 'vertices: NAME ...'", number)
    names = rest.split()
    index = {}
    for name in names:
        if name in index:
            raise ParseError(f"duplicate vertex name {name!r}", number)
        index[name] = len(index)

    marks = {}
    for number, line in lines:
        parts = line.split()
        if len(parts) != 3 or parts[1] not in _OPS:
            raise ParseError(f"expected 'A OP B' with OP in {' '.join(_OPS)}: {line!r}", number)
        a, op, b = parts
        if op not in allowed:
            raise ParseError(f"operator {op!r} not allowed here", number)
        for name in (a, b):
            if name not in index:
                raise ParseError(f"unknown vertex {name!r}", number)
        i, j = index[a], index[b]
        if i == j:
            raise ParseError(f"self-pair {a} {op} {b}", number)
        pair = (min(i, j), max(i, j))
        if pair in marks:
            raise ParseError(f"pair {a}, {b} listed more than once", number)
        kind = _OPS[op]
        if kind in (MarkKind.DIRECTED, MarkKind.SEMI_DIRECTED):
            marks[pair] = (EdgeMark(kind, i, j), number)
        else:
            marks[pair] = (EdgeMark(kind), number)
    return names, marks


def parse_kg(text: str) -> KnowledgeGraph:
    names, marks = _parse(text, set(_OPS))
    return KnowledgeGraph.build(len(names), {p: m for p, (m, _) in marks.items()}, names)


def parse_dag(text: str) -> Dag:
    names, marks = _parse(text, {"->"})
    try:
        return Dag.from_edges(len(names), [(m.source, m.target) for m, _ in marks.values()],
                              names)
    except InputError as exc:
        raise ParseError(str(exc)) from None


def _fmt(names, i, op, j):
    return f"{names[i]} {op} {names[j]}"


def format_mark(kg: KnowledgeGraph, i: int, j: int) -> str:
    m = kg.mark(i, j)
    if m.kind in (MarkKind.DIRECTED, MarkKind.SEMI_DIRECTED):
        return _fmt(kg.names, m.source, m.kind.value, m.target)
    return _fmt(kg.names, i, m.kind.value, j)


def dump_kg(kg: KnowledgeGraph, explicit_no_knowledge: bool = False) -> str:
    """Canonical text: header, then non-default pairs in lexicographic order."""
    out = ["vertices: " + " ".join(kg.names)]
    for (i, j), m in kg.marks():
        if m == NO_KNOWLEDGE and not explicit_no_knowledge:
            continue
        out.append(format_mark(kg, i, j))
    return "\n".join(out) + "\n"


def dump_dag(g: Dag) -> str:
    out = ["vertices: " + " ".join(g.names)]
    out.extend(_fmt(g.names, a, "->", b) for a, b in g.edges)
    return "\n".join(out) + "\n"


def kg_delta(before: KnowledgeGraph, after: KnowledgeGraph) -> list[str]:
    """Serialized marks of the pairs whose mark changed."""
    return [format_mark(after, i, j) for (i, j), m in after.marks() if before.mark(i, j) != m]


def read_kg(path) -> KnowledgeGraph:
    return parse_kg(Path(path).read_text(encoding="utf-8"))


def read_dag(path) -> Dag:
    return parse_dag(Path(path).read_text(encoding="utf-8"))


def write_kg(kg: KnowledgeGraph, path) -> None:
    Path(path).write_text(dump_kg(kg), encoding="utf-8")

