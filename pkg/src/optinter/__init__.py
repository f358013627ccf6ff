"""Choosing intervention sets that pin down a causal DAG in few experiments."""

from .equivalence import (enumerate_dags, is_unique, meek_closure, members, ome_by_enumeration,
                          pattern_from_oracle, update_knowledge)
from .errors import ConflictError, EnumerationGuardError, InputError, ParseError
from .formats import dump_dag, dump_kg, parse_dag, parse_kg, read_dag, read_kg
from .graphs import (NO_KNOWLEDGE, NON_ADJACENT, UNDIRECTED, Dag, EdgeMark, KnowledgeGraph,
                     MarkKind, combine_marks, manipulate, maximal_cliques_unknown)
from .oracle import CiOracle, d_separated
from .planner import PlannerConfig, conjectured_bound, optinter, optinter_plan
from .simulation import StudyConfig, run_sequence, run_study, verify_conjecture_exhaustive

__version__ = "0.1.0"
