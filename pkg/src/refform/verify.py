"""Exhaustive checking of the monotone-reference lemma and time preservation
over every small single-input multiple-clock-domain circuit.

The circuit class: one data input ``I``, ``k`` flip-flops each on its own
free clock, every flip-flop fed by a non-empty subset of ``{I, F1..Fk}``,
and the output fed by a non-empty subset of the same.  Free clocks make every
latch/hold pattern admissible, so each circuit is checked under all
``2**(k*horizon)`` schedules.
"""

from __future__ import annotations

import json
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from typing import Iterator, Mapping

from . import corpus
from .influence import Compiled, restriction_map
from .model import Circuit, ClockDecl, DataSource, FFSource, FlipFlop, Free, ReferringForm, Schedule, Selector
from .oracle import semantic_influence
from .order import (
    _EdgeCollector,
    _monotone,
    check_time_preservation,
    circuit_precedence_graph,
    lemma_check,
)

__all__ = [
    "MAX_FFS",
    "enumerate_mcd_circuits",
    "mcd_circuit_count",
    "VerifyReport",
    "check_circuit",
    "verify_theorem",
    "verify_lemma",
    "lemma_violations",
    "oracle_spot_check",
    "SelectiveConflict",
    "find_counterexample_selective",
]

MAX_FFS = 2


def _subsets(k: int) -> list[frozenset]:
    universe = [DataSource("I")] + [FFSource(i) for i in range(k)]
    return [
        frozenset(s for b, s in enumerate(universe) if mask >> b & 1)
        for mask in range(1, 1 << len(universe))
    ]


def mcd_circuit_count(ff_count: int) -> int:
    return (2 ** (ff_count + 1) - 1) ** (ff_count + 1) if ff_count else 1


def enumerate_mcd_circuits(ff_count: int, max_ffs: int = MAX_FFS) -> Iterator[Circuit]:
    """Every connectivity of the class with ``ff_count`` flip-flops, in a fixed order."""
    if not 0 <= ff_count <= max_ffs:
        raise ValueError(f"ff_count must be in [0, {max_ffs}], got {ff_count}")
    if ff_count == 0:
        yield Circuit(("I",), (), Selector.fixed([DataSource("I")]), name="mcd0_0")
        return
    subsets = _subsets(ff_count)
    clocks = tuple(ClockDecl(f"c{i + 1}", Free()) for i in range(ff_count))
    n = 0
    for ff_srcs in product(subsets, repeat=ff_count):
        ffs = tuple(FlipFlop(f"F{i + 1}", f"c{i + 1}", Selector.fixed(s)) for i, s in enumerate(ff_srcs))
        for out in subsets:
            yield Circuit(("I",), ffs, Selector.fixed(out), clocks=clocks, name=f"mcd{ff_count}_{n}")
            n += 1


@dataclass
class VerifyReport:
    kind: str
    ff_count: int
    horizon: int
    circuits: int = 0
    schedules_per_circuit: int = 0
    checked: int = 0
    failures: list = field(default_factory=list)
    self_loop_circuits: int = 0
    oracle_checked: int = 0
    oracle_mismatches: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures and not self.oracle_mismatches

    def text(self) -> str:
        noun = "failures" if self.kind == "theorem" else "violations"
        lines = [
            f"{self.kind}: checked {self.circuits} circuits × {self.schedules_per_circuit} schedules: "
            f"{len(self.failures)} {noun}",
            f"(circuit, schedule) pairs: {self.checked}",
            f"circuits with flip-flop self-loops: {self.self_loop_circuits}",
        ]
        if self.oracle_checked:
            lines.append(
                f"oracle spot-check: {self.oracle_checked} pairs, {len(self.oracle_mismatches)} mismatches"
            )
        for f in self.failures:
            lines.append(f"FAIL {f['circuit']}: {json.dumps(f, sort_keys=True)}")
        for m in self.oracle_mismatches:
            lines.append(f"ORACLE MISMATCH {json.dumps(m, sort_keys=True)}")
        return "\n".join(lines)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "ff_count": self.ff_count,
            "horizon": self.horizon,
            "circuits": self.circuits,
            "schedules_per_circuit": self.schedules_per_circuit,
            "checked": self.checked,
            "failures": self.failures,
            "self_loop_circuits": self.self_loop_circuits,
            "oracle_checked": self.oracle_checked,
            "oracle_mismatches": self.oracle_mismatches,
        }


def _check_circuit(args) -> tuple[int, list]:
    """Evaluate every schedule of one circuit; return (count, failure records)."""
    kind, index, circuit, horizon = args
    comp = Compiled(circuit)
    per_step = [comp.columns(t) for t in range(horizon)]
    first: dict[tuple, tuple] = {}
    count = 0
    for cols, past, cur in comp.iter_runs(per_step):
        count += 1
        if past not in first:
            first[past] = (cols, cur)
    failures = []
    if kind == "theorem":
        seqs = list(first)
        col = _EdgeCollector()
        for i, past in enumerate(seqs):
            col.add_sequence(past, i)
        verdict = check_time_preservation(col.graph())
        if not verdict.preserving:
            witness = []
            for e in verdict.witness:
                cols, cur = first[seqs[e.form]]
                witness.append(
                    {
                        "from": comp.refset(e.source).to_json(),
                        "to": comp.refset(e.target).to_json(),
                        "t1": e.t1,
                        "t2": e.t2,
                        "schedule": comp.schedule_of(cols).to_spec(circuit),
                    }
                )
            failures.append({"circuit": circuit.name, "index": index, "witness": witness})
    else:
        P = comp.P
        for past, (cols, cur) in first.items():
            res = _monotone([(m.bit_length() - 1) // P if m else None for m in past])
            if not res:
                failures.append(
                    {
                        "circuit": circuit.name,
                        "index": index,
                        "schedule": comp.schedule_of(cols).to_spec(circuit),
                        "pair": list(res.pair),
                        "form": comp.form(past, cur).to_json(),
                    }
                )
    return count, failures


def check_circuit(circuit: Circuit, horizon: int, kind: str = "theorem") -> tuple[int, list]:
    """Run the harness check on one circuit under all its schedules.

    Any circuit is accepted, which lets the harness be pointed at circuits
    outside the class.  Returns ``(schedules evaluated, failure records)``.
    """
    if kind not in ("theorem", "lemma"):
        raise ValueError(f"unknown check {kind!r}")
    return _check_circuit((kind, 0, circuit, horizon))


def _verify(kind: str, ff_max: int, horizon: int, workers: int, oracle_sample: int, seed: int) -> VerifyReport:
    if horizon < 1:
        raise ValueError("horizon must be positive")
    circuits = list(enumerate_mcd_circuits(ff_max))
    report = VerifyReport(kind, ff_max, horizon)
    report.circuits = len(circuits)
    report.schedules_per_circuit = 2 ** (ff_max * horizon)
    report.self_loop_circuits = sum(c.has_self_loop() for c in circuits)
    jobs = [(kind, i, c, horizon) for i, c in enumerate(circuits)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            results = list(ex.map(_check_circuit, jobs, chunksize=16))
    else:
        results = map(_check_circuit, jobs)
    for count, failures in results:
        report.checked += count
        report.failures.extend(failures)
    if oracle_sample:
        report.oracle_checked, report.oracle_mismatches = oracle_spot_check(
            circuits, horizon, oracle_sample, seed
        )
    return report


def verify_theorem(ff_max: int, horizon: int, *, workers: int = 1, oracle_sample: int = 100, seed: int = 0) -> VerifyReport:
    """Check time preservation of the full form set of every class circuit."""
    return _verify("theorem", ff_max, horizon, workers, oracle_sample, seed)


def verify_lemma(ff_max: int, horizon: int, *, workers: int = 1, oracle_sample: int = 100, seed: int = 0) -> VerifyReport:
    """Check the monotone-reference property on every (circuit, schedule) form.

    Forms are checked once per distinct value; every schedule is still
    evaluated and counted.
    """
    return _verify("lemma", ff_max, horizon, workers, oracle_sample, seed)


def lemma_violations(forms) -> list[tuple[int, tuple[int, int]]]:
    """Indices (and violating step pairs) of forms failing the lemma check."""
    out = []
    for i, f in enumerate(forms):
        res = lemma_check(f)
        if not res:
            out.append((i, res.pair))
    return out


def _random_schedule(circuit: Circuit, horizon: int, rng: random.Random) -> Schedule:
    latch = [tuple(rng.random() < 0.5 for _ in range(horizon)) for _ in circuit.ffs]
    return Schedule(horizon, latch)


def oracle_spot_check(circuits, horizon: int, sample: int, seed: int = 0) -> tuple[int, list]:
    """Compare the symbolic form with exhaustive perturbation on random pairs."""
    rng = random.Random(seed)
    circuits = list(circuits)
    mismatches = []
    for _ in range(sample):
        i = rng.randrange(len(circuits))
        sched = _random_schedule(circuits[i], horizon, rng)
        sym = restriction_map(circuits[i], sched)
        sem = semantic_influence(circuits[i], sched)
        if sym != sem:
            mismatches.append(
                {"circuit": circuits[i].name, "schedule": sched.to_spec(circuits[i]), "symbolic": sym.to_json(), "semantic": sem.to_json()}
            )
    return sample, mismatches


@dataclass(frozen=True)
class SelectiveConflict:
    """Two forms ordering the same pair of values oppositely.

    ``first.past[a] == second.past[d]`` and ``first.past[b] == second.past[c]``
    with ``a < b`` and ``c < d``.
    """

    first: ReferringForm
    second: ReferringForm
    first_schedule: Schedule
    second_schedule: Schedule
    a: int
    b: int
    c: int
    d: int

    @property
    def values(self):
        return self.first.past[self.a], self.first.past[self.b]


def find_counterexample_selective(
    horizon: int,
    circuit: Circuit | None = None,
    fixed_choices: Mapping | None = None,
) -> SelectiveConflict | None:
    """Search the selective-memory circuit for a pair of forms in opposite order."""
    if circuit is None:
        circuit = corpus.load("selmem")
    graph = circuit_precedence_graph(circuit, horizon, fixed_choices=fixed_choices)
    best = None
    for (u, v), evs in graph.edges.items():
        back = graph.edges.get((v, u))
        if not back:
            continue
        for x in evs:
            for y in back:
                if x.form == y.form:
                    continue
                key = (
                    (not u) + (not v),
                    (x.t1 == y.t2) + (x.t2 == y.t1),
                    x.t2,
                    y.t2,
                    x,
                    y,
                )
                if best is None or key < best[0]:
                    best = (key, x, y)
    if best is None:
        return None
    _, x, y = best
    return SelectiveConflict(
        graph.forms[x.form],
        graph.forms[y.form],
        graph.schedules[x.form],
        graph.schedules[y.form],
        x.t1,
        x.t2,
        y.t1,
        y.t2,
    )
