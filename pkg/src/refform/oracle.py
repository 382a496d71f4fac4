"""Brute-force ground truth by concrete Mealy-machine simulation.

A circuit is instantiated with concrete values and run on every input
stream over a small alphabet.  An occurrence ``(p, tau)`` influences output
step ``t`` when two streams differing only at ``(p, tau)`` produce different
outputs at ``t``.

With *tupling* semantics every flip-flop stores the tuple of its source
values and the output emits the tuple of its sources, so no dependency can
cancel and semantic influence coincides with connectivity.  *XOR* semantics
sums source values modulo the alphabet size; reconvergent paths can then
cancel, so its influence may be strictly smaller.
"""

from __future__ import annotations

import itertools
from typing import Callable, Sequence

from .influence import BudgetExceeded, budget_from_env
from .model import Circuit, DataSource, ReferringForm, RefSet, Schedule

__all__ = [
    "BOTTOM",
    "DEFAULT_ORACLE_BUDGET",
    "MealyMachine",
    "run",
    "instantiate_tupling",
    "instantiate_xor",
    "semantic_influence",
    "causality_check",
]

DEFAULT_ORACLE_BUDGET = 2**20


class _Bottom:
    """Value of a flip-flop that has never latched."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self) -> str:
        return "⊥"

    def __reduce__(self):
        return (_Bottom, ())


BOTTOM = _Bottom()


class MealyMachine:
    """Deterministic machine ``(S, psi)`` driven by a data input and a step control.

    ``transition(state, inputs, control)`` returns ``(output, next_state)``;
    ``control`` is whatever the caller's schedule supplies for the step
    (``None`` for machines that ignore it).
    """

    def __init__(self, initial, transition: Callable, n_ports: int = 1, alphabet: Sequence = (0, 1)):
        self.initial = initial
        self.transition = transition
        self.n_ports = n_ports
        self.alphabet = tuple(alphabet)

    def controls(self, schedule: Schedule | None, horizon: int) -> list:
        return [None] * horizon

    def stream_function(self, schedule: Schedule | None = None) -> Callable[[Sequence], list]:
        """Fix the control stream and return the induced causal stream function."""
        return lambda inputs: run(self, inputs, schedule)


class _CircuitMachine(MealyMachine):
    def __init__(self, circuit: Circuit, alphabet: Sequence, combine: Callable):
        self.circuit = circuit
        n = len(circuit.ffs)
        super().__init__((BOTTOM,) * n, self._transition, len(circuit.data_ports), alphabet)
        pidx = {p: i for i, p in enumerate(circuit.data_ports)}

        def lower(sel):
            return sel.control, [
                [("d", pidx[s.port]) if isinstance(s, DataSource) else ("f", s.index) for s in circuit.sorted_sources(alt)]
                for alt in sel.alternatives
            ]

        self._ff = [lower(ff.data_input) for ff in circuit.ffs]
        self._out = lower(circuit.output)
        self._combine = combine

    def controls(self, schedule: Schedule | None, horizon: int) -> list:
        if schedule is None:
            raise ValueError("circuit machines need a schedule")
        if schedule.horizon != horizon:
            raise ValueError(f"schedule horizon {schedule.horizon} != stream length {horizon}")
        schedule.validate(self.circuit)
        choices = schedule.choices
        out = []
        for t in range(horizon):
            latch = tuple(row[t] for row in schedule.latch)
            out.append((latch, {k: v[t] for k, v in choices.items()}))
        return out

    def _eval(self, sel, state, inputs, chosen):
        ctl, alts = sel
        srcs = alts[chosen.get(ctl, 0) if ctl is not None else 0]
        return self._combine([inputs[i] if kind == "d" else state[i] for kind, i in srcs])

    def _transition(self, state, inputs, control):
        latch, chosen = control
        out = self._eval(self._out, state, inputs, chosen)
        nxt = tuple(
            self._eval(sel, state, inputs, chosen) if latch[i] else state[i]
            for i, sel in enumerate(self._ff)
        )
        return out, nxt


def instantiate_tupling(circuit: Circuit, alphabet: Sequence = (0, 1)) -> MealyMachine:
    if not alphabet:
        raise ValueError("alphabet must be non-empty")
    return _CircuitMachine(circuit, alphabet, tuple)


def instantiate_xor(circuit: Circuit, alphabet: Sequence = (0, 1)) -> MealyMachine:
    """Sum of source values modulo ``len(alphabet)``; unlatched values count as 0."""
    if not alphabet:
        raise ValueError("alphabet must be non-empty")
    k = len(alphabet)
    index = {a: i for i, a in enumerate(alphabet)}

    def combine(values):
        return sum(index.get(v, 0) for v in values) % k

    return _CircuitMachine(circuit, alphabet, combine)


def run(m: MealyMachine, inputs: Sequence, schedule: Schedule | None = None) -> list:
    """Output stream for ``inputs``; ``(o_t, s_t) = psi(s_{t-1}, i_t)``.

    Each element of ``inputs`` is a tuple with one value per data port (a
    bare value is accepted for single-port machines).
    """
    if schedule is not None and len(inputs) != schedule.horizon:
        raise ValueError(f"input length {len(inputs)} != schedule horizon {schedule.horizon}")
    controls = m.controls(schedule, len(inputs))
    state = m.initial
    out = []
    for x, ctl in zip(inputs, controls):
        if not isinstance(x, tuple):
            x = (x,)
        o, state = m.transition(state, x, ctl)
        out.append(o)
    return out


def _streams(n_ports: int, horizon: int, alphabet: Sequence, budget: int | None) -> list[tuple]:
    if budget is None:
        budget = budget_from_env(DEFAULT_ORACLE_BUDGET)
    count = len(alphabet) ** (n_ports * horizon)
    if count > budget:
        raise BudgetExceeded(f"{count} input streams exceed oracle budget {budget}", count)
    return list(itertools.product(alphabet, repeat=n_ports * horizon))


def _chunk(flat: tuple, n_ports: int) -> list[tuple]:
    return [flat[i : i + n_ports] for i in range(0, len(flat), n_ports)]


def semantic_influence(
    circuit: Circuit,
    schedule: Schedule,
    alphabet: Sequence = (0, 1),
    *,
    mode: str = "tupling",
    budget: int | None = None,
) -> ReferringForm:
    """Influence sets recovered by exhaustive single-occurrence perturbation."""
    if mode == "tupling":
        m = instantiate_tupling(circuit, alphabet)
    elif mode == "xor":
        m = instantiate_xor(circuit, alphabet)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    P, H = len(circuit.data_ports), schedule.horizon
    alphabet = tuple(alphabet)
    streams = _streams(P, H, alphabet, budget)
    k = len(alphabet)
    outputs = [run(m, _chunk(s, P), schedule) for s in streams]
    # stream index is mixed radix, digit for position j has weight k**(n-1-j)
    n = P * H
    influence = [set() for _ in range(H)]
    for j in range(n):
        tau, p = divmod(j, P)
        weight = k ** (n - 1 - j)
        affected = set()
        for idx in range(len(streams)):
            digit = (idx // weight) % k
            if digit:
                continue
            base = outputs[idx]
            for d in range(1, k):
                other = outputs[idx + d * weight]
                for t in range(tau, H):
                    if t not in affected and other[t] != base[t]:
                        affected.add(t)
            if len(affected) == H - tau:
                break
        for t in affected:
            influence[t].add((circuit.data_ports[p], tau))
    past = tuple(RefSet(o for o in influence[t] if o[1] < t) for t in range(H))
    cur = tuple(frozenset(port for port, tau in influence[t] if tau == t) for t in range(H))
    return ReferringForm(H, past, cur)


def causality_check(
    m: MealyMachine | Callable[[Sequence], Sequence],
    horizon: int,
    *,
    schedule: Schedule | None = None,
    n_ports: int | None = None,
    alphabet: Sequence | None = None,
    budget: int | None = None,
) -> bool:
    """True when every output at ``t`` is fixed by the inputs up to ``t``.

    ``m`` may be a :class:`MealyMachine` or any function mapping a full input
    stream (list of per-step tuples) to an output stream.
    """
    if isinstance(m, MealyMachine):
        fn = m.stream_function(schedule)
        n_ports = m.n_ports if n_ports is None else n_ports
        alphabet = m.alphabet if alphabet is None else alphabet
    else:
        fn = m
        n_ports = 1 if n_ports is None else n_ports
        alphabet = (0, 1) if alphabet is None else alphabet
    streams = _streams(n_ports, horizon, tuple(alphabet), budget)
    outs = {s: fn(_chunk(s, n_ports)) for s in streams}
    for t in range(horizon):
        seen: dict = {}
        cut = (t + 1) * n_ports
        for s, o in outs.items():
            prev = seen.setdefault(s[:cut], o[t])
            if prev != o[t]:
                return False
    return True
