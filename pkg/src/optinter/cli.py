"""Command-line entry point: ``optinter {ome,plan,simulate,verify,session}``.

Exit codes: 0 success, 1 usage or parse error, 2 conflicting knowledge,
3 conjecture violation or guard failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .equivalence import MEMBERS_GUARD, members, pattern_from_oracle
from .errors import ConflictError, EnumerationGuardError, InputError
from .formats import dump_kg, read_dag, read_kg
from .graphs import max_unknown_clique_size
from .oracle import CiOracle
from .planner import PlannerConfig, conjectured_bound, optinter_plan
from .session import replay, run_interactive
from .simulation import (RECORD_HEADER, StudyConfig, record_line, run_study,
                         verify_conjecture_exhaustive)

EXIT_OK, EXIT_USAGE, EXIT_CONFLICT, EXIT_VIOLATION = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _max_inter(text):
    if text in ("none", "unlimited"):
        return None
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("max-inter must be >= 1 or 'unlimited'")
    return value


def _names(kg, vertices):
    return " ".join(kg.names[v] for v in sorted(vertices))


def cmd_ome(args, out, err):
    dag = read_dag(args.dag)
    kg = pattern_from_oracle(CiOracle(dag))
    text = dump_kg(kg)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        out.write(text)
    size = max_unknown_clique_size(kg)
    bound = conjectured_bound(kg)
    try:
        count = str(len(members(kg, guard=args.members_guard)))
    except EnumerationGuardError:
        count = "skipped"
        err.write(f"note: member count skipped above {args.members_guard} vertices\n")
    err.write(f"members: {count}, max clique: {size}, bound: {bound}\n")
    return EXIT_OK


def cmd_plan(args, out, err):
    kg = read_kg(args.kg)
    cfg = PlannerConfig(max_inter=args.max_inter, seed=args.seed,
                        post_process=not args.no_post_process, tie_break=args.tie_break)
    plan = optinter_plan(kg, cfg)
    if not plan.cliques:
        out.write("intervention: (none)\n")
        err.write("nothing to plan: every edge is known\n")
        return EXIT_OK
    out.write(f"intervention: {_names(kg, plan.intervention)}\n")
    err.write(f"h = {plan.h}\n")
    for c in plan.relevant:
        err.write(f"relevant clique: {_names(kg, c)}\n")
    for step in plan.steps:
        counts = " ".join(f"{kg.names[v]}={c}" for v, c in sorted(step.counts.items()))
        tag = "post-process" if step.post_process else "select"
        err.write(f"{tag} {kg.names[step.vertex]} from {{{_names(kg, step.clique)}}} "
                  f"counts: {counts}\n")
    for c in plan.unresolved:
        err.write(f"warning: clique {{{_names(kg, c)}}} stays unresolved this round\n")
    return EXIT_OK


_STUDY_KEYS = {"n", "sampler", "edge_prob", "deletions", "samples", "planner", "max_inter",
               "post_process", "tie_break", "seed", "guard"}


def _study_config(args):
    settings = {}
    if args.config:
        data = json.loads(Path(args.config).read_text(encoding="utf-8"))
        unknown = set(data) - _STUDY_KEYS
        if unknown:
            raise InputError(f"unknown study-config keys: {sorted(unknown)}")
        settings.update(data)
    for key in _STUDY_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    max_inter = settings.get("max_inter")
    if isinstance(max_inter, str):
        max_inter = _max_inter(max_inter)
    pcfg = PlannerConfig(max_inter=max_inter, post_process=settings.get("post_process", True),
                         tie_break=settings.get("tie_break", "random"))
    return StudyConfig(n=settings.get("n", 12), sampler=settings.get("sampler", "uniform"),
                       edge_prob=settings.get("edge_prob", 0.5),
                       deletions=settings.get("deletions", 2),
                       samples=settings.get("samples", 1000),
                       planner=settings.get("planner", "optinter"), planner_cfg=pcfg,
                       master_seed=settings.get("seed", 0), guard=settings.get("guard"))


def _verify(n, seed, out):
    report = verify_conjecture_exhaustive(n, seed=seed)
    out.write("\n".join(report.lines()) + "\n")
    return EXIT_VIOLATION if report.violations else EXIT_OK


def cmd_simulate(args, out, err):
    if args.exhaustive:
        if args.n is None:
            raise InputError("--exhaustive needs --n")
        return _verify(args.n, args.seed or 0, out)
    cfg = _study_config(args)
    sidecar = None
    if args.records:
        sidecar = open(args.records, "w", encoding="utf-8")
        sidecar.write(RECORD_HEADER + "\n")
    try:
        table = run_study(cfg, on_record=(lambda r: sidecar.write(record_line(r) + "\n"))
                          if sidecar else None, workers=args.workers)
    finally:
        if sidecar:
            sidecar.close()
    csv = table.to_csv()
    if args.output:
        Path(args.output).write_text(csv, encoding="utf-8")
    else:
        out.write(csv)
    for record in table.failures:
        why = "guard exceeded" if record.guard_exceeded else "bound exceeded"
        err.write(f"violation ({why}): seed={record.seed} clique={record.max_clique_size} "
                  f"count={record.count}\n")
    return EXIT_VIOLATION if table.violations else EXIT_OK


def cmd_verify(args, out, err):
    return _verify(args.n, args.seed, out)


def cmd_session(args, out, err):
    if args.replay:
        kg = replay(Path(args.replay).read_text(encoding="utf-8"))
        out.write(dump_kg(kg))
        return EXIT_OK
    if not args.kg:
        raise InputError("session needs a .kg file (or --replay LOG)")
    kg = read_kg(args.kg)
    cfg = PlannerConfig(max_inter=args.max_inter, seed=args.seed)
    with open(args.log, "w", encoding="utf-8") as log:
        run_interactive(kg, cfg, sys.stdin, out, log)
    return EXIT_OK


def build_parser():
    parser = _Parser(prog="optinter", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ome", help="observational pattern of a DAG")
    p.add_argument("dag", help=".dag file")
    p.add_argument("-o", "--output", help="write the .kg here instead of stdout")
    p.add_argument("--members-guard", type=int, default=MEMBERS_GUARD)
    p.set_defaults(func=cmd_ome)

    p = sub.add_parser("plan", help="OPTINTER intervention set for a knowledge graph")
    p.add_argument("kg", help=".kg file")
    p.add_argument("--max-inter", type=_max_inter, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tie-break", choices=("random", "lowest"), default="random")
    p.add_argument("--no-post-process", action="store_true")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("simulate", help="sampled study of experiment counts")
    p.add_argument("--config", help="JSON file with the same keys as the flags")
    p.add_argument("--n", type=int)
    p.add_argument("--sampler", choices=("uniform", "dense"))
    p.add_argument("--edge-prob", dest="edge_prob", type=float)
    p.add_argument("--deletions", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--planner", choices=("optinter", "random", "maxcut"))
    p.add_argument("--max-inter", dest="max_inter", type=_max_inter)
    p.add_argument("--no-post-process", dest="post_process", action="store_const",
                   const=False)
    p.add_argument("--tie-break", dest="tie_break", choices=("random", "lowest"))
    p.add_argument("--seed", type=int)
    p.add_argument("--guard", type=int)
    p.add_argument("--workers", type=int, default=1, help="processes for record evaluation")
    p.add_argument("--exhaustive", action="store_true",
                   help="run every DAG on --n vertices instead of sampling")
    p.add_argument("-o", "--output", help="CSV file (default stdout)")
    p.add_argument("--records", help="per-record sidecar CSV")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="exhaustive conjecture check for small n")
    p.add_argument("n", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("session", help="interactive planning with you as the oracle")
    p.add_argument("kg", nargs="?", help=".kg file")
    p.add_argument("--max-inter", type=_max_inter, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--log", default="session.log")
    p.add_argument("--replay", help="rebuild the final graph from a session log")
    p.set_defaults(func=cmd_session)
    return parser


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, out, err)
    except ConflictError as exc:
        err.write(f"conflict: {exc}\n")
        return EXIT_CONFLICT
    except (InputError, OSError, json.JSONDecodeError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
