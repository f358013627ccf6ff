import io

import pytest

from optinter.equivalence import pattern_from_oracle
from optinter.errors import ConflictError, InputError, ParseError
from optinter.formats import dump_kg
from optinter.graphs import EdgeMark, NON_ADJACENT
from optinter.oracle import CiOracle
from optinter.planner import PlannerConfig
from optinter.session import Session, replay, run_interactive, verdict_mark


@pytest.fixture
def chain_kg(chain):
    return pattern_from_oracle(CiOracle(chain))


def test_verdict_marks(chain_kg):
    I = frozenset({1})
    assert verdict_mark(chain_kg, I, 1, 2, True) == EdgeMark.directed(1, 2)
    assert verdict_mark(chain_kg, I, 0, 1, False) == EdgeMark.semi_directed(0, 1)
    assert verdict_mark(chain_kg, I, 0, 2, False) == NON_ADJACENT


def test_session_resolves_chain_and_replays(chain_kg):
    log = io.StringIO()
    s = Session(chain_kg, PlannerConfig(), log)
    assert s.proposal() == {1}
    s.intervene()
    assert s.answer("X", "indep", "Y") == ["X -> Y", "Y -> Z"]
    assert s.unique
    assert replay(log.getvalue()) == s.kg


def test_conflicting_answer_rolls_back(chain_kg):
    log = io.StringIO()
    s = Session(chain_kg, log=log)
    s.intervene(["Y"])
    s.answer("Y", "dep", "Z")
    before = s.kg
    s.done()
    s.intervene(["Z"])
    with pytest.raises(ConflictError):
        s.answer("Z", "dep", "Y")
    assert s.kg == before
    assert "# rejected: Z dep Y" in log.getvalue()
    assert replay(log.getvalue()) == before


def test_bad_input(chain_kg):
    s = Session(chain_kg)
    with pytest.raises(InputError):
        s.answer("X", "maybe", "Y")
    with pytest.raises(InputError):
        s.answer("X", "dep", "Q")
    s.intervene(["X", "Y"])
    with pytest.raises(InputError):
        s.answer("X", "dep", "Y")


def test_replay_detects_tampering(chain_kg):
    log = io.StringIO()
    s = Session(chain_kg, log=log)
    s.intervene(["Y"])
    s.answer("Y", "dep", "Z")
    text = log.getvalue().replace("Y -> Z", "Z -> Y")
    with pytest.raises(ParseError):
        replay(text)


def test_interactive_loop(chain_kg):
    out, log = io.StringIO(), io.StringIO()
    stdin = io.StringIO("help\nbogus\nintervene Y\nY dep Z\nX dep Y\n")
    final = run_interactive(chain_kg, PlannerConfig(), stdin, out, log)
    text = out.getvalue()
    assert "proposed intervention: Y" in text
    assert "unrecognised input" in text
    assert text.rstrip().endswith("unique")
    assert final.directed_edges() == [(1, 0), (1, 2)]
    assert replay(log.getvalue()) == final


def test_interactive_multi_round(five_ome):
    out, log = io.StringIO(), io.StringIO()
    # truth: X -> V, X -> W, X -> Y, W -> V, Y -> W, Y -> Z
    cmds = ("intervene X\nX dep V\nX dep W\nX dep Y\nW dep V\nW dep Y\nY dep Z\ndone\n"
            "intervene Y\nY dep W\nY dep Z\n")
    final = run_interactive(five_ome, PlannerConfig(), io.StringIO(cmds), out, log)
    assert dump_kg(final) == dump_kg(replay(log.getvalue()))
    assert not any(final.unknown)
