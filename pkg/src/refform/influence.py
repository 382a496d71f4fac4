"""Influence propagation over the time-unrolled circuit graph.

Occurrence sets are tracked as integer bitmasks internally: data port ``p``
(index into ``circuit.data_ports``) at step ``t`` is bit ``t * P + p``.

Step semantics (registered read): the output at ``t`` sees the flip-flop
contents from before step ``t``'s update; afterwards every latching
flip-flop simultaneously takes the occurrences of its chosen data sources at
``t`` together with the pre-update contents of its chosen flip-flop sources.
Holding flip-flops keep their contents.  Everything starts empty.
"""

from __future__ import annotations

import itertools
import os
from typing import Iterator, Mapping, Sequence

from .model import (
    Circuit,
    DataSource,
    Free,
    ReferringForm,
    RefSet,
    Schedule,
    ScheduleError,
)

__all__ = [
    "DEFAULT_BUDGET",
    "BudgetExceeded",
    "Compiled",
    "restriction_map",
    "ff_contents_trace",
    "form_from_trace",
    "schedule_space",
    "iter_schedules",
    "enumerate_forms",
    "all_referring_forms",
    "budget_from_env",
]

DEFAULT_BUDGET = 2**24


class BudgetExceeded(RuntimeError):
    def __init__(self, message: str, cardinality: int):
        super().__init__(message)
        self.cardinality = cardinality


def budget_from_env(default: int) -> int:
    """``REFFORM_BUDGET`` overrides enumeration budgets when set."""
    raw = os.environ.get("REFFORM_BUDGET")
    if not raw:
        return default
    try:
        value = int(raw, 0)
    except ValueError:
        raise ValueError(f"REFFORM_BUDGET must be an integer, got {raw!r}") from None
    if value < 1:
        raise ValueError("REFFORM_BUDGET must be positive")
    return value


class Compiled:
    """Circuit lowered to index form for fast mask propagation.

    A step *column* is ``(clock_bits, choices)``: one latch bit per used
    clock (in declaration order) and one alternative index per selecting
    control port (sorted by name).
    """

    def __init__(self, circuit: Circuit):
        self.circuit = circuit
        self.P = len(circuit.data_ports)
        pidx = {p: i for i, p in enumerate(circuit.data_ports)}
        used = {ff.clock for ff in circuit.ffs}
        self.clocks = [c for c in circuit.clocks if c.name in used]
        cidx = {c.name: i for i, c in enumerate(self.clocks)}
        self.ff_clock = [cidx[ff.clock] for ff in circuit.ffs]
        arity = circuit.control_arity()
        self.controls = sorted(k for k, a in arity.items())
        self.arity = [arity[k] for k in self.controls]
        kidx = {k: i for i, k in enumerate(self.controls)}

        def lower(sel):
            alts = []
            for alt in sel.alternatives:
                data = tuple(sorted(pidx[s.port] for s in alt if isinstance(s, DataSource)))
                ffs = tuple(sorted(s.index for s in alt if not isinstance(s, DataSource)))
                cur = 0
                for p in data:
                    cur |= 1 << p
                alts.append((data, ffs, cur))
            return (kidx[sel.control] if sel.control is not None else -1), alts

        self.ff_sel = [lower(ff.data_input) for ff in circuit.ffs]
        self.out_sel = lower(circuit.output)

    # -- step columns ---------------------------------------------------------

    def clock_options(self, t: int) -> list[tuple[bool, ...]]:
        per_clock = []
        for decl in self.clocks:
            if isinstance(decl.ref, Free):
                per_clock.append((False, True))
            else:
                per_clock.append((decl.ref.has_edge(t),))
        return list(itertools.product(*per_clock))

    def columns(self, t: int) -> list[tuple]:
        choice_opts = list(itertools.product(*[range(a) for a in self.arity]))
        return [(cb, ch) for cb in self.clock_options(t) for ch in choice_opts]

    def column_of(self, schedule: Schedule, t: int) -> tuple:
        bits = [None] * len(self.clocks)
        for i, c in enumerate(self.ff_clock):
            bits[c] = schedule.latch[i][t]
        choices = schedule.choices
        ch = tuple(choices.get(k, (0,) * schedule.horizon)[t] for k in self.controls)
        return tuple(bits), ch

    def schedule_of(self, cols: Sequence[tuple]) -> Schedule:
        H = len(cols)
        latch = tuple(tuple(cols[t][0][c] for t in range(H)) for c in self.ff_clock)
        choice = {k: tuple(cols[t][1][j] for t in range(H)) for j, k in enumerate(self.controls)}
        return Schedule(H, latch, choice)

    # -- propagation ------------------------------------------------------------

    def step(self, contents: tuple[int, ...], t: int, col: tuple) -> tuple[int, int, tuple[int, ...]]:
        """Return ``(past_mask, current_mask, next_contents)`` for one step."""
        bits, ch = col
        k, alts = self.out_sel
        data, ffs, cur = alts[ch[k] if k >= 0 else 0]
        past = 0
        for j in ffs:
            past |= contents[j]
        base = t * self.P
        nxt = list(contents)
        for i, (k, alts) in enumerate(self.ff_sel):
            if bits[self.ff_clock[i]]:
                data, ffs, _ = alts[ch[k] if k >= 0 else 0]
                v = 0
                for p in data:
                    v |= 1 << (base + p)
                for j in ffs:
                    v |= contents[j]
                nxt[i] = v
        return past, cur, tuple(nxt)

    def iter_runs(self, per_step: Sequence[Sequence[tuple]]) -> Iterator[tuple[tuple, tuple, tuple]]:
        """Yield ``(cols, past, current)`` for every schedule, lexicographically.

        Every schedule is visited individually; shared prefixes are
        propagated once.
        """
        H = len(per_step)
        if H == 0:
            return
        init = (0,) * len(self.ff_sel)
        stack = [(0, init, (), (), ())]
        while stack:
            t, contents, cols, past, cur = stack.pop()
            last = t + 1 == H
            children = []
            for col in per_step[t]:
                p, c, after = self.step(contents, t, col)
                if last:
                    yield cols + (col,), past + (p,), cur + (c,)
                else:
                    children.append((t + 1, after, cols + (col,), past + (p,), cur + (c,)))
            stack.extend(reversed(children))

    def run(self, cols: Sequence[tuple]) -> tuple[tuple[int, ...], tuple[int, ...], list[tuple[int, ...]]]:
        contents = (0,) * len(self.ff_sel)
        past, cur, trace = [], [], []
        for t, col in enumerate(cols):
            p, c, contents = self.step(contents, t, col)
            past.append(p)
            cur.append(c)
            trace.append(contents)
        return tuple(past), tuple(cur), trace

    # -- conversion ---------------------------------------------------------------

    def refset(self, mask: int) -> RefSet:
        out = []
        ports = self.circuit.data_ports
        while mask:
            low = mask & -mask
            b = low.bit_length() - 1
            out.append((ports[b % self.P], b // self.P))
            mask ^= low
        return RefSet(out)

    def ports(self, mask: int) -> frozenset[str]:
        return frozenset(p for i, p in enumerate(self.circuit.data_ports) if mask >> i & 1)

    def form(self, past: Sequence[int], cur: Sequence[int]) -> ReferringForm:
        return ReferringForm(
            len(past), tuple(self.refset(m) for m in past), tuple(self.ports(m) for m in cur)
        )


def _columns(circuit: Circuit, schedule: Schedule) -> tuple[Compiled, list]:
    if schedule.horizon < 1:
        raise ScheduleError("horizon must be at least 1")
    schedule.validate(circuit)
    comp = Compiled(circuit)
    return comp, [comp.column_of(schedule, t) for t in range(schedule.horizon)]


def restriction_map(circuit: Circuit, schedule: Schedule) -> ReferringForm:
    """Referring form of ``circuit`` under one resolved control stream."""
    comp, cols = _columns(circuit, schedule)
    past, cur, _ = comp.run(cols)
    return comp.form(past, cur)


def ff_contents_trace(circuit: Circuit, schedule: Schedule) -> list[tuple[RefSet, ...]]:
    """Flip-flop contents after each step's update (one tuple per step)."""
    comp, cols = _columns(circuit, schedule)
    _, _, trace = comp.run(cols)
    return [tuple(comp.refset(m) for m in row) for row in trace]


def form_from_trace(circuit: Circuit, schedule: Schedule, trace: Sequence[Sequence[RefSet]]) -> ReferringForm:
    """Rebuild the referring form from a contents trace and the output choices."""
    out = circuit.output
    past, cur = [], []
    for t in range(schedule.horizon):
        before = trace[t - 1] if t else (RefSet(),) * len(circuit.ffs)
        alt = out.alternatives[schedule.choice_at(out.control, t)]
        rs = RefSet()
        for src in alt:
            if not isinstance(src, DataSource):
                rs = rs | before[src.index]
        past.append(rs)
        cur.append(frozenset(s.port for s in alt if isinstance(s, DataSource)))
    return ReferringForm(schedule.horizon, tuple(past), tuple(cur))


# --- schedule space ------------------------------------------------------------


def _restricted_columns(comp: Compiled, t: int, fixed_choices: Mapping | None) -> list[tuple]:
    cols = comp.columns(t)
    if not fixed_choices:
        return cols
    keep = []
    for bits, ch in cols:
        ok = True
        for j, k in enumerate(comp.controls):
            if k in fixed_choices:
                want = fixed_choices[k]
                want = want if isinstance(want, int) else want[t]
                ok = ok and ch[j] == want
        if ok:
            keep.append((bits, ch))
    return keep


def schedule_space(circuit: Circuit, horizon: int, fixed_choices: Mapping | None = None) -> int:
    """Number of admissible schedules at ``horizon``."""
    if horizon < 1:
        raise ScheduleError("horizon must be positive")
    comp = Compiled(circuit)
    n = 1
    for t in range(horizon):
        n *= len(_restricted_columns(comp, t, fixed_choices))
    return n


def iter_schedules(circuit: Circuit, horizon: int, fixed_choices: Mapping | None = None) -> Iterator[Schedule]:
    """All admissible schedules in lexicographic order (step 0 most significant)."""
    comp = Compiled(circuit)
    per_step = [_restricted_columns(comp, t, fixed_choices) for t in range(horizon)]
    for cols in itertools.product(*per_step):
        yield comp.schedule_of(cols)


def enumerate_forms(
    circuit: Circuit,
    horizon: int,
    *,
    budget: int | None = None,
    method: str = "auto",
    fixed_choices: Mapping | None = None,
) -> dict[ReferringForm, Schedule]:
    """Map each distinct referring form to the first schedule producing it.

    ``method="exhaustive"`` evaluates every schedule independently and is
    refused when the schedule space exceeds ``budget``.  ``method="merged"``
    walks step by step, merging schedule prefixes that reach the same
    flip-flop contents with the same form prefix; it is exact, and the budget
    bounds the number of step expansions instead.  ``"auto"`` means merged.
    """
    if budget is None:
        budget = budget_from_env(DEFAULT_BUDGET)
    if horizon < 1:
        raise ScheduleError("horizon must be positive")
    comp = Compiled(circuit)
    per_step = [_restricted_columns(comp, t, fixed_choices) for t in range(horizon)]
    card = 1
    for cols in per_step:
        card *= len(cols)
    if method == "auto":
        method = "merged"
    if method == "exhaustive":
        if card > budget:
            raise BudgetExceeded(
                f"schedule space has {card} schedules, budget is {budget}", card
            )
        found: dict[tuple, tuple] = {}
        for cols, past, cur in comp.iter_runs(per_step):
            found.setdefault((past, cur), cols)
    elif method == "merged":
        found = _merged(comp, per_step, budget, card)
    else:
        raise ValueError(f"unknown method {method!r}")
    out = {comp.form(p, c): comp.schedule_of(cols) for (p, c), cols in found.items()}
    return dict(sorted(out.items(), key=lambda kv: kv[0].sort_key()))


def _merged(comp: Compiled, per_step: list[list], budget: int, card: int) -> dict:
    frontier: dict[tuple, tuple] = {((0,) * len(comp.ff_sel), (), ()): ()}
    work = 0
    for t, cols in enumerate(per_step):
        work += len(frontier) * len(cols)
        if work > budget:
            raise BudgetExceeded(
                f"merged enumeration exceeded budget {budget} at step {t} "
                f"(schedule space has {card} schedules)",
                card,
            )
        nxt: dict[tuple, tuple] = {}
        for (contents, past, cur), rep in frontier.items():
            for col in cols:
                p, c, after = comp.step(contents, t, col)
                key = (after, past + (p,), cur + (c,))
                if key not in nxt:
                    nxt[key] = rep + (col,)
        frontier = nxt
    found: dict[tuple, tuple] = {}
    for (_, past, cur), rep in frontier.items():
        prev = found.get((past, cur))
        if prev is None or rep < prev:
            found[(past, cur)] = rep
    return found


def all_referring_forms(
    circuit: Circuit,
    horizon: int,
    *,
    budget: int | None = None,
    method: str = "auto",
    fixed_choices: Mapping | None = None,
) -> frozenset[ReferringForm]:
    """The set R of referring forms over every admissible schedule."""
    return frozenset(
        enumerate_forms(circuit, horizon, budget=budget, method=method, fixed_choices=fixed_choices)
    )
