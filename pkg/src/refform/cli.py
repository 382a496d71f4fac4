"""Command-line front end.

Exit codes: 0 ok / time preserving, 1 input error, 2 budget exceeded,
3 not time preserving (or a verification failure), 4 oracle mismatch.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .dsl import DSLError, parse
from .influence import DEFAULT_BUDGET, BudgetExceeded, budget_from_env, enumerate_forms, restriction_map
from .model import Circuit, ScheduleError, schedule_from_clocks
from .oracle import semantic_influence
from .order import check_time_preservation, circuit_precedence_graph
from .render import ascii_timeline, dot_graph, form_table
from .verify import MAX_FFS, mcd_circuit_count, verify_lemma, verify_theorem

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_BUDGET = 2
EXIT_NOT_PRESERVING = 3
EXIT_ORACLE = 4


class _InputError(Exception):
    pass


def _load(path: str) -> Circuit:
    try:
        text = Path(path).read_bytes()
    except OSError as exc:
        raise _InputError(f"{path}: cannot read file: {exc.strerror or exc}") from None
    try:
        return parse(text)
    except DSLError as exc:
        raise _InputError(f"{path}:{exc.span.line}:{exc.span.column}: {exc.message}") from None


def parse_schedule_spec(circuit: Circuit, spec: str, horizon: int):
    """``F=10001000;sel=00110011``: latch bits per flip-flop (or clock), choice digits per control."""
    latches, choices = {}, {}
    for part in filter(None, (p.strip() for p in spec.split(";"))):
        name, sep, bits = part.partition("=")
        name, bits = name.strip(), bits.strip()
        if not sep or not name:
            raise ScheduleError(f"malformed schedule entry {part!r}")
        if len(bits) != horizon:
            raise ScheduleError(f"{name}: expected {horizon} digits, got {len(bits)}")
        if not bits.isdigit():
            raise ScheduleError(f"{name}: digits expected, got {bits!r}")
        if name in circuit.control_ports:
            choices[name] = [int(b) for b in bits]
        else:
            latches[name] = bits
    return schedule_from_clocks(circuit, horizon, choices, latches)


def _schedule(circuit: Circuit, args):
    if args.schedule:
        return parse_schedule_spec(circuit, args.schedule, args.horizon)
    try:
        return schedule_from_clocks(circuit, args.horizon)
    except ScheduleError as exc:
        raise ScheduleError(f"{exc}; pass --schedule or --all-schedules") from None


def cmd_analyze(args) -> int:
    circuit = _load(args.file)
    if args.all_schedules:
        forms = enumerate_forms(circuit, args.horizon)
        if args.format == "json":
            doc = {
                "forms": [f.to_json() for f in forms],
                "schedules": [s.to_spec(circuit) for s in forms.values()],
            }
            print(json.dumps(doc, sort_keys=True))
        else:
            print(f"# {len(forms)} distinct referring forms of {circuit.name}, horizon {args.horizon}")
            for i, (form, sched) in enumerate(forms.items()):
                print(f"\n# form {i}, schedule {sched.to_spec(circuit)}")
                sys.stdout.write(form_table(form))
        return EXIT_OK
    sched = _schedule(circuit, args)
    form = restriction_map(circuit, sched)
    if args.format == "json":
        print(json.dumps(form.to_json(), sort_keys=True))
    else:
        print(f"# referring form of {circuit.name}, horizon {args.horizon}")
        print(f"# schedule {sched.to_spec(circuit)}")
        sys.stdout.write(form_table(form))
    return EXIT_OK


def cmd_check(args) -> int:
    circuit = _load(args.file)
    if args.all_schedules:
        verdict = check_time_preservation(circuit_precedence_graph(circuit, args.horizon))
    else:
        verdict = check_time_preservation([restriction_map(circuit, _schedule(circuit, args))])
    if args.format == "json":
        doc = verdict.to_json()
        if verdict.witness is not None and verdict.schedules is not None:
            used = sorted({e.form for e in verdict.witness})
            doc["schedules"] = {str(i): verdict.schedules[i].to_spec(circuit) for i in used}
        print(json.dumps(doc, sort_keys=True))
    elif verdict.preserving:
        print("time-preserving")
    else:
        print("NOT time-preserving")
        print("witness cycle:")
        for e in verdict.witness:
            where = f"form {e.form}"
            if verdict.schedules is not None:
                where += f" [{verdict.schedules[e.form].to_spec(circuit)}]"
            print(f"  {e.source} -> {e.target}   {where}, t1={e.t1}, t2={e.t2}")
    return EXIT_OK if verdict.preserving else EXIT_NOT_PRESERVING


def cmd_verify(args) -> int:
    if not 0 <= args.ffs <= MAX_FFS:
        raise BudgetExceeded(f"--ffs {args.ffs} exceeds the enumeration bound {MAX_FFS}", args.ffs)
    work = mcd_circuit_count(args.ffs) * 2 ** (args.ffs * args.horizon)
    budget = budget_from_env(DEFAULT_BUDGET)
    if work > budget:
        raise BudgetExceeded(f"{work} (circuit, schedule) pairs exceed budget {budget}", work)
    kinds = [k for k in ("theorem", "lemma") if getattr(args, k)] or ["theorem", "lemma"]
    reports = []
    for kind in kinds:
        fn = verify_theorem if kind == "theorem" else verify_lemma
        reports.append(
            fn(args.ffs, args.horizon, workers=args.workers, oracle_sample=args.oracle_sample, seed=args.seed)
        )
    if args.format == "json":
        doc = reports[0].to_json() if len(reports) == 1 else [r.to_json() for r in reports]
        print(json.dumps(doc, sort_keys=True))
    else:
        print("\n\n".join(r.text() for r in reports))
    if any(r.failures for r in reports):
        return EXIT_NOT_PRESERVING
    if any(r.oracle_mismatches for r in reports):
        return EXIT_ORACLE
    return EXIT_OK


def cmd_oracle_diff(args) -> int:
    circuit = _load(args.file)
    sched = _schedule(circuit, args)
    sym = restriction_map(circuit, sched)
    sem = semantic_influence(circuit, sched, mode=args.mode)
    diffs = []
    for t in range(sched.horizon):
        sp, mp = set(sym.past[t]), set(sem.past[t])
        sc, mc = sym.current[t], sem.current[t]
        if sp != mp or sc != mc:
            diffs.append(
                f"step {t}: past only-symbolic {sorted(map(str, sp - mp))} only-semantic {sorted(map(str, mp - sp))}; "
                f"current only-symbolic {sorted(sc - mc)} only-semantic {sorted(mc - sc)}"
            )
    if diffs:
        print("\n".join(diffs))
        return EXIT_ORACLE
    print("no differences")
    return EXIT_OK


def cmd_render(args) -> int:
    circuit = _load(args.file)
    sched = _schedule(circuit, args)
    if args.format == "dot":
        sys.stdout.write(dot_graph(circuit, sched))
    else:
        sys.stdout.write(ascii_timeline(circuit, sched))
    return EXIT_OK


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # usage errors are input errors; 2 is reserved for budget overruns
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="refform", description="Referring forms of sequential circuits.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def schedule_opts(p, allow_all=True):
        p.add_argument("file")
        p.add_argument("--horizon", type=_positive, required=True)
        g = p.add_mutually_exclusive_group()
        g.add_argument("--schedule", help='e.g. "F=10001000;sel=00110011"')
        if allow_all:
            g.add_argument("--all-schedules", action="store_true")

    p = sub.add_parser("analyze", help="print the referring form table")
    schedule_opts(p)
    p.add_argument("--format", choices=["table", "json"], default="table")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("check", help="decide time preservation")
    schedule_opts(p)
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("verify", help="exhaustive lemma/theorem check over small circuits")
    p.add_argument("--ffs", type=int, required=True)
    p.add_argument("--horizon", type=_positive, required=True)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--theorem", action="store_true")
    g.add_argument("--lemma", action="store_true")
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.add_argument("--workers", type=_positive, default=1)
    p.add_argument("--oracle-sample", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("oracle-diff", help="compare symbolic and simulated influence")
    schedule_opts(p, allow_all=False)
    p.add_argument("--mode", choices=["tupling", "xor"], default="tupling")
    p.set_defaults(func=cmd_oracle_diff)

    p = sub.add_parser("render", help="draw the time-unrolled graph")
    schedule_opts(p, allow_all=False)
    p.add_argument("--format", choices=["ascii", "dot"], default="ascii")
    p.set_defaults(func=cmd_render)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_INPUT
    try:
        return args.func(args)
    except _InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except BudgetExceeded as exc:
        print(f"error: budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET


if __name__ == "__main__":
    sys.exit(main())
