"""Oracle-driven experiment sequences and the clique-size study."""

from __future__ import annotations

import hashlib
import io
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Iterator

from .equivalence import enumerate_dags, is_unique, pattern_from_oracle, update_knowledge
from .errors import InputError
from .graphs import Dag, KnowledgeGraph, max_unknown_clique_size
from .oracle import CiOracle
from .planner import PlannerConfig, ceil_log2, full_space_bound, get_planner

SAMPLERS = ("uniform", "dense")


def sample_dag_uniform(n: int, edge_prob: float, rng: random.Random) -> Dag:
    """Random topological order, each forward pair kept with ``edge_prob``."""
    if not 0.0 <= edge_prob <= 1.0:
        raise InputError("edge_prob must lie in [0, 1]")
    order = list(range(n))
    rng.shuffle(order)
    edges = [(order[i], order[j]) for i in range(n) for j in range(i + 1, n)
             if rng.random() < edge_prob]
    return Dag.from_edges(n, edges)


def sample_dag_dense(n: int, deletions: int, rng: random.Random) -> Dag:
    """Complete DAG over a random order with ``deletions`` random edges removed."""
    total = n * (n - 1) // 2
    if not 0 <= deletions <= total:
        raise InputError(f"deletions must lie in [0, {total}]")
    order = list(range(n))
    rng.shuffle(order)
    edges = [(order[i], order[j]) for i in range(n) for j in range(i + 1, n)]
    for k in sorted(rng.sample(range(total), deletions), reverse=True):
        del edges[k]
    return Dag.from_edges(n, edges)


def derive_seed(master: int, index: int) -> int:
    """Stable 64-bit seed for sample ``index`` of a study."""
    digest = hashlib.blake2b(f"{master}:{index}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big")


@dataclass
class StudyRecord:
    truth: Dag
    max_clique_size: int
    experiments: list[frozenset[int]]
    seed: int = 0
    guard_exceeded: bool = False
    final: KnowledgeGraph | None = field(default=None, repr=False)

    @property
    def count(self) -> int:
        return len(self.experiments)

    @property
    def bound(self) -> int:
        return ceil_log2(self.max_clique_size)

    @property
    def met_bound(self) -> bool:
        return not self.guard_exceeded and self.count <= self.bound


def run_sequence(truth: Dag, planner: str | Callable = "optinter",
                 cfg: PlannerConfig = PlannerConfig(), guard: int | None = None,
                 initial: KnowledgeGraph | None = None, seed: int = 0,
                 on_step: Callable | None = None) -> StudyRecord:
    """Plan, experiment and update until the truth is uniquely identified.

    Starts from the observational pattern of ``truth`` unless ``initial`` is
    given.  Running past ``guard`` experiments stops the loop and flags the
    record rather than raising, so counterexamples surface in the table.
    """
    plan = get_planner(planner) if isinstance(planner, str) else planner
    if guard is None:
        guard = full_space_bound(truth.n) + 2
    if guard < 1:
        raise InputError("guard must be at least 1")
    kg = initial if initial is not None else pattern_from_oracle(CiOracle(truth))
    record = StudyRecord(truth, max_unknown_clique_size(kg), [], seed=seed)
    step_cfg = cfg
    while not is_unique(kg):
        if record.count >= guard:
            record.guard_exceeded = True
            break
        intervention = plan(kg, step_cfg)
        new = update_knowledge(kg, intervention, CiOracle(truth, intervention),
                               experiment=record.count)
        record.experiments.append(intervention)
        if on_step is not None:
            on_step(kg, intervention, new)
        kg = new
        # fresh tie-breaks each round; same seed gives the same sequence
        step_cfg = replace(step_cfg, seed=derive_seed(step_cfg.seed, record.count))
    record.final = kg
    return record


@dataclass(frozen=True)
class StudyConfig:
    n: int = 12
    sampler: str = "uniform"
    edge_prob: float = 0.5
    deletions: int = 2
    samples: int = 1000
    planner: str = "optinter"
    planner_cfg: PlannerConfig = PlannerConfig()
    master_seed: int = 0
    guard: int | None = None

    def __post_init__(self):
        if self.n < 1:
            raise InputError("n must be positive")
        if self.samples < 1:
            raise InputError("samples must be at least 1")
        if self.sampler not in SAMPLERS:
            raise InputError(f"sampler must be one of {SAMPLERS}")
        get_planner(self.planner)
        if self.guard is not None and self.guard < full_space_bound(self.n):
            raise InputError("guard must be at least floor(log2 n) + 1")

    @property
    def effective_guard(self) -> int:
        return self.guard if self.guard is not None else full_space_bound(self.n) + 2


def sample_truth(cfg: StudyConfig, seed: int) -> Dag:
    rng = random.Random(seed)
    if cfg.sampler == "dense":
        return sample_dag_dense(cfg.n, cfg.deletions, rng)
    return sample_dag_uniform(cfg.n, cfg.edge_prob, rng)


def run_record(cfg: StudyConfig, seed: int) -> StudyRecord:
    """Re-run a single study sample from its seed."""
    truth = sample_truth(cfg, seed)
    pcfg = replace(cfg.planner_cfg, seed=seed)
    record = run_sequence(truth, cfg.planner, pcfg, cfg.effective_guard, seed=seed)
    record.final = None
    return record


def _run_indexed(cfg, index):
    return run_record(cfg, derive_seed(cfg.master_seed, index))


def iter_records(cfg: StudyConfig, workers: int = 1) -> Iterator[StudyRecord]:
    """Records in sample order; ``workers > 1`` evaluates them in a process pool."""
    if workers < 1:
        raise InputError("workers must be at least 1")
    if workers == 1:
        for index in range(cfg.samples):
            yield _run_indexed(cfg, index)
        return
    with ProcessPoolExecutor(workers) as pool:
        yield from pool.map(_run_indexed, [cfg] * cfg.samples, range(cfg.samples),
                            chunksize=max(1, cfg.samples // (4 * workers)))


@dataclass
class Bucket:
    samples: int = 0
    total: int = 0
    maximum: int = 0
    violations: int = 0

    def add(self, record: StudyRecord) -> None:
        self.samples += 1
        self.total += record.count
        self.maximum = max(self.maximum, record.count)
        self.violations += not record.met_bound

    @property
    def mean(self) -> float:
        return self.total / self.samples if self.samples else 0.0


@dataclass
class StudyTable:
    """Per max-clique-size aggregates; merging is order independent."""

    buckets: dict[int, Bucket] = field(default_factory=dict)
    failures: list[StudyRecord] = field(default_factory=list)

    def add(self, record: StudyRecord) -> None:
        self.buckets.setdefault(record.max_clique_size, Bucket()).add(record)
        if not record.met_bound:
            self.failures.append(record)

    @property
    def violations(self) -> int:
        return sum(b.violations for b in self.buckets.values())

    @property
    def samples(self) -> int:
        return sum(b.samples for b in self.buckets.values())

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("clique_size,samples,mean_experiments,max_experiments,"
                  "conjectured_bound,violations\n")
        for size in sorted(self.buckets):
            b = self.buckets[size]
            out.write(f"{size},{b.samples},{b.mean:.6f},{b.maximum},"
                      f"{ceil_log2(size)},{b.violations}\n")
        return out.getvalue()


RECORD_HEADER = "seed,clique_size,count,met_bound"


def record_line(record: StudyRecord) -> str:
    return f"{record.seed},{record.max_clique_size},{record.count},{int(record.met_bound)}"


def run_study(cfg: StudyConfig, on_record: Callable[[StudyRecord], None] | None = None,
              workers: int = 1) -> StudyTable:
    """Sample ``cfg.samples`` truths and aggregate experiment counts.

    Records are streamed to ``on_record`` (e.g. a sidecar writer) and not
    kept, except the ones that broke the bound.  The table does not depend
    on ``workers``.
    """
    table = StudyTable()
    for record in iter_records(cfg, workers):
        table.add(record)
        if on_record is not None:
            on_record(record)
    return table


@dataclass
class VerificationReport:
    n: int
    dags: int = 0
    runs: int = 0
    by_size: dict[int, Bucket] = field(default_factory=dict)
    violations: list[tuple[Dag, str, int]] = field(default_factory=list)

    def lines(self) -> list[str]:
        out = [f"n={self.n} dags={self.dags} runs={self.runs} "
               f"violations={len(self.violations)}",
               "clique_size,runs,mean_experiments,max_experiments,conjectured_bound,violations"]
        for size in sorted(self.by_size):
            b = self.by_size[size]
            out.append(f"{size},{b.samples},{b.mean:.6f},{b.maximum},{ceil_log2(size)},"
                       f"{b.violations}")
        for truth, mode, count in self.violations:
            out.append(f"violation: mode={mode} count={count} edges={truth.edges}")
        return out


def verify_conjecture_exhaustive(n: int, tie_breaks: Iterable[str] = ("random", "lowest"),
                                 seed: int = 0, post_process: bool = True,
                                 dags: Iterable[Dag] | None = None) -> VerificationReport:
    """Run OPTINTER on every DAG over ``n`` vertices, in each tie-break mode."""
    if n > 5 and dags is None:
        raise InputError("exhaustive verification is limited to n <= 5")
    modes = tuple(tie_breaks)
    report = VerificationReport(n)
    for index, truth in enumerate(dags if dags is not None else enumerate_dags(n)):
        report.dags += 1
        initial = pattern_from_oracle(CiOracle(truth))
        for mode in modes:
            cfg = PlannerConfig(seed=derive_seed(seed, index), tie_break=mode,
                                post_process=post_process)
            record = run_sequence(truth, "optinter", cfg, initial=initial)
            report.runs += 1
            report.by_size.setdefault(record.max_clique_size, Bucket()).add(record)
            if not record.met_bound or record.final is None or not is_unique(record.final):
                report.violations.append((truth, mode, record.count))
    return report
