"""Data model: circuits, clocks, schedules, input occurrences and referring forms.

Time is 0-based throughout.  A referring form assigns to every output step
``t`` the set of past data-input occurrences ``(port, time)`` (``time < t``)
the output may depend on, plus the data ports read combinationally at ``t``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, NamedTuple, Sequence, Union

__all__ = [
    "CircuitError",
    "ScheduleError",
    "PortId",
    "InputOccurrence",
    "RefSet",
    "EMPTY",
    "canonicalize",
    "ReferringForm",
    "DataSource",
    "FFSource",
    "Source",
    "Selector",
    "Periodic",
    "ExplicitEdges",
    "Free",
    "ClockRef",
    "ClockDecl",
    "FlipFlop",
    "Circuit",
    "Schedule",
    "schedule_from_clocks",
]


class CircuitError(ValueError):
    """A circuit description violates a structural invariant."""


class ScheduleError(ValueError):
    """A schedule is inconsistent with the circuit it is applied to."""


class PortId(NamedTuple):
    name: str
    kind: str  # "data" or "control"


class InputOccurrence(NamedTuple):
    """One data port observed at one absolute time step."""

    port: str
    time: int

    def __str__(self) -> str:
        return f"{self.port}@{self.time}"


class RefSet:
    """Immutable, canonically ordered set of :class:`InputOccurrence`.

    Equality is element-set equality; the stream length a value was
    observed at plays no part.
    """

    __slots__ = ("_items", "_hash")

    def __init__(self, occurrences: Iterable[Union[InputOccurrence, tuple]] = ()) -> None:
        items = tuple(sorted({InputOccurrence(str(p), int(t)) for p, t in occurrences}))
        object.__setattr__(self, "_items", items)
        object.__setattr__(self, "_hash", hash(items))

    def __setattr__(self, name, value):
        raise AttributeError("RefSet is immutable")

    @property
    def occurrences(self) -> tuple[InputOccurrence, ...]:
        return self._items

    def __iter__(self) -> Iterator[InputOccurrence]:
        return iter(self._items)

    def __len__(self) -> int:
        return len(self._items)

    def __bool__(self) -> bool:
        return bool(self._items)

    def __contains__(self, item) -> bool:
        return tuple(item) in self._items

    def __eq__(self, other) -> bool:
        if isinstance(other, RefSet):
            return self._items == other._items
        return NotImplemented

    def __hash__(self) -> int:
        return self._hash

    def __lt__(self, other: "RefSet") -> bool:
        return self.sort_key() < other.sort_key()

    def __or__(self, other: "RefSet") -> "RefSet":
        return RefSet(self._items + other._items)

    def sort_key(self) -> tuple:
        return (len(self._items), self._items)

    def max_time(self, port: str | None = None) -> int | None:
        """Latest occurrence time, optionally restricted to one port."""
        times = [o.time for o in self._items if port is None or o.port == port]
        return max(times) if times else None

    def ports(self) -> frozenset[str]:
        return frozenset(o.port for o in self._items)

    def to_json(self) -> list[dict]:
        return [{"port": o.port, "time": o.time} for o in self._items]

    @classmethod
    def from_json(cls, data: Sequence[Mapping]) -> "RefSet":
        return cls((d["port"], d["time"]) for d in data)

    def __str__(self) -> str:
        return "{" + ", ".join(map(str, self._items)) + "}"

    def __repr__(self) -> str:
        return f"RefSet({[tuple(o) for o in self._items]!r})"


EMPTY = RefSet()


def canonicalize(rs: Union[RefSet, Iterable[tuple]]) -> RefSet:
    """Duplicate-free, (port, time)-ordered copy of ``rs``.  Idempotent."""
    if isinstance(rs, RefSet):
        return rs
    return RefSet(rs)


@dataclass(frozen=True)
class ReferringForm:
    """Per-step record of which input occurrences an output may refer to.

    ``past[t]`` holds occurrences strictly before ``t``; ``current[t]`` holds
    the data ports read at ``t`` itself.
    """

    horizon: int
    past: tuple[RefSet, ...]
    current: tuple[frozenset[str], ...]

    def __post_init__(self):
        past = tuple(canonicalize(p) for p in self.past)
        current = tuple(frozenset(c) for c in self.current)
        object.__setattr__(self, "past", past)
        object.__setattr__(self, "current", current)
        if self.horizon < 1:
            raise ValueError("horizon must be positive")
        if len(past) != self.horizon or len(current) != self.horizon:
            raise ValueError("past/current length must equal horizon")
        for t, rs in enumerate(past):
            for occ in rs:
                if not 0 <= occ.time < t:
                    raise ValueError(f"occurrence {occ} at step {t} is not strictly past")

    @classmethod
    def from_steps(cls, past: Sequence, current: Sequence | None = None) -> "ReferringForm":
        """Convenience constructor; ``current`` defaults to nothing read."""
        if current is None:
            current = [()] * len(past)
        return cls(len(past), tuple(RefSet(p) for p in past), tuple(frozenset(c) for c in current))

    def __getitem__(self, t: int) -> RefSet:
        return self.past[t]

    def __len__(self) -> int:
        return self.horizon

    def truncate(self, horizon: int) -> "ReferringForm":
        return ReferringForm(horizon, self.past[:horizon], self.current[:horizon])

    def sort_key(self) -> tuple:
        return (
            self.horizon,
            tuple(p.sort_key() for p in self.past),
            tuple(tuple(sorted(c)) for c in self.current),
        )

    def __lt__(self, other: "ReferringForm") -> bool:
        return self.sort_key() < other.sort_key()

    def to_json(self) -> dict:
        return {
            "horizon": self.horizon,
            "steps": [
                {"t": t, "past": self.past[t].to_json(), "current": sorted(self.current[t])}
                for t in range(self.horizon)
            ],
        }

    def dumps(self, **kwargs) -> str:
        return json.dumps(self.to_json(), **kwargs)

    @classmethod
    def from_json(cls, data: Mapping) -> "ReferringForm":
        steps = sorted(data["steps"], key=lambda s: s["t"])
        if [s["t"] for s in steps] != list(range(data["horizon"])):
            raise ValueError("steps must cover 0..horizon-1 exactly once")
        return cls(
            data["horizon"],
            tuple(RefSet.from_json(s["past"]) for s in steps),
            tuple(frozenset(s["current"]) for s in steps),
        )


# --- circuit structure -------------------------------------------------------


@dataclass(frozen=True, order=True)
class DataSource:
    port: str

    def __str__(self) -> str:
        return self.port


@dataclass(frozen=True, order=True)
class FFSource:
    index: int

    def __str__(self) -> str:
        return f"ff[{self.index}]"


Source = Union[DataSource, FFSource]


def _source_key(src: Source) -> tuple:
    return (0, src.port, 0) if isinstance(src, DataSource) else (1, "", src.index)


@dataclass(frozen=True)
class Selector:
    """Control-driven choice between source sets.

    A fixed connection is the single-alternative selector with no control.
    """

    alternatives: tuple[frozenset, ...]
    control: str | None = None

    def __post_init__(self):
        alts = tuple(frozenset(a) for a in self.alternatives)
        object.__setattr__(self, "alternatives", alts)
        if not alts:
            raise CircuitError("selector needs at least one alternative")
        if self.control is None and len(alts) != 1:
            raise CircuitError("a selector with several alternatives needs a control port")

    @classmethod
    def fixed(cls, sources: Iterable[Source]) -> "Selector":
        return cls((frozenset(sources),))

    @property
    def arity(self) -> int:
        return len(self.alternatives)

    def sources(self) -> frozenset:
        return frozenset().union(*self.alternatives)


@dataclass(frozen=True)
class Periodic:
    period: int
    offset: int = 0

    def __post_init__(self):
        if self.period < 1:
            raise CircuitError(f"clock period must be positive, got {self.period}")
        if not 0 <= self.offset < self.period:
            raise CircuitError(f"clock offset {self.offset} outside [0, {self.period})")

    def has_edge(self, t: int) -> bool:
        return t % self.period == self.offset


@dataclass(frozen=True)
class ExplicitEdges:
    edges: frozenset

    def __post_init__(self):
        edges = frozenset(int(e) for e in self.edges)
        if any(e < 0 for e in edges):
            raise CircuitError("clock edges must be non-negative")
        object.__setattr__(self, "edges", edges)

    def has_edge(self, t: int) -> bool:
        return t in self.edges


@dataclass(frozen=True)
class Free:
    """Unconstrained clock: every latch/hold pattern is admissible."""

    def has_edge(self, t: int) -> bool:
        raise ScheduleError("a free clock has no predetermined edges")


ClockRef = Union[Periodic, ExplicitEdges, Free]


@dataclass(frozen=True)
class ClockDecl:
    name: str
    ref: ClockRef


@dataclass(frozen=True)
class FlipFlop:
    name: str
    clock: str
    data_input: Selector


@dataclass(frozen=True)
class Circuit:
    """A single-output sequential circuit at connectivity level.

    Identifiers (ports, clocks, flip-flops) share one namespace.  Selectors
    driven by the same control port make the same choice at every step, so
    they must have equal arity.
    """

    data_ports: tuple[str, ...]
    ffs: tuple[FlipFlop, ...]
    output: Selector
    control_ports: tuple[str, ...] = ()
    clocks: tuple[ClockDecl, ...] = ()
    name: str = "main"

    def __post_init__(self):
        for attr in ("data_ports", "ffs", "control_ports", "clocks"):
            object.__setattr__(self, attr, tuple(getattr(self, attr)))
        self._validate()

    def _validate(self) -> None:
        if not self.data_ports:
            raise CircuitError("a circuit needs at least one data port")
        names = (
            list(self.data_ports)
            + list(self.control_ports)
            + [c.name for c in self.clocks]
            + [f.name for f in self.ffs]
        )
        seen = set()
        for n in names:
            if not n:
                raise CircuitError("identifiers must be non-empty")
            if n in seen:
                raise CircuitError(f"duplicate name {n}")
            seen.add(n)
        clocks = {c.name for c in self.clocks}
        for ff in self.ffs:
            if ff.clock not in clocks:
                raise CircuitError(f"flip-flop {ff.name} uses undeclared clock {ff.clock}")
        arity = {}
        for owner, sel in self.selectors():
            if sel.control is not None:
                if sel.control not in self.control_ports:
                    raise CircuitError(f"{owner}: {sel.control} is not a control port")
                if arity.setdefault(sel.control, sel.arity) != sel.arity:
                    raise CircuitError(
                        f"{owner}: selector arity {sel.arity} does not match "
                        f"other selectors on {sel.control} ({arity[sel.control]})"
                    )
            for src in sel.sources():
                if isinstance(src, DataSource):
                    if src.port not in self.data_ports:
                        raise CircuitError(f"{owner}: unknown data source {src.port}")
                elif isinstance(src, FFSource):
                    if not 0 <= src.index < len(self.ffs):
                        raise CircuitError(f"{owner}: flip-flop index {src.index} out of range")
                else:
                    raise CircuitError(f"{owner}: not a source: {src!r}")

    def selectors(self) -> Iterator[tuple[str, Selector]]:
        for ff in self.ffs:
            yield ff.name, ff.data_input
        yield "output", self.output

    @property
    def port_ids(self) -> tuple[PortId, ...]:
        return tuple(PortId(p, "data") for p in self.data_ports) + tuple(
            PortId(p, "control") for p in self.control_ports
        )

    def clock_of(self, ff: int | str) -> ClockRef:
        if isinstance(ff, str):
            ff = self.ff_index(ff)
        name = self.ffs[ff].clock
        return next(c.ref for c in self.clocks if c.name == name)

    def ff_index(self, name: str) -> int:
        for i, ff in enumerate(self.ffs):
            if ff.name == name:
                return i
        raise KeyError(name)

    def source_name(self, src: Source) -> str:
        return src.port if isinstance(src, DataSource) else self.ffs[src.index].name

    def sorted_sources(self, sources: Iterable[Source]) -> list[Source]:
        return sorted(sources, key=_source_key)

    def control_arity(self) -> dict[str, int]:
        """Alternative count per control port that drives some selector."""
        out = {}
        for _, sel in self.selectors():
            if sel.control is not None:
                out[sel.control] = sel.arity
        return out

    def is_mcd_class(self) -> bool:
        """True for the single-input multiple-clock-domain class with no selection."""
        return len(self.data_ports) == 1 and all(sel.arity == 1 for _, sel in self.selectors())

    def has_self_loop(self) -> bool:
        return any(FFSource(i) in ff.data_input.sources() for i, ff in enumerate(self.ffs))


# --- schedules -----------------------------------------------------------------


@dataclass(frozen=True)
class Schedule:
    """One resolved control stream.

    ``latch[i][t]`` is True when flip-flop ``i`` latches at step ``t``;
    ``choice`` maps each selecting control port to its per-step alternative
    index.
    """

    horizon: int
    latch: tuple[tuple[bool, ...], ...]
    choice: tuple[tuple[str, tuple[int, ...]], ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "latch", tuple(tuple(bool(b) for b in row) for row in self.latch))
        items = self.choice.items() if isinstance(self.choice, Mapping) else self.choice
        object.__setattr__(
            self, "choice", tuple(sorted((k, tuple(int(x) for x in v)) for k, v in items))
        )
        if self.horizon < 1:
            raise ScheduleError("horizon must be positive")
        for row in self.latch:
            if len(row) != self.horizon:
                raise ScheduleError("latch row length must equal horizon")
        for k, row in self.choice:
            if len(row) != self.horizon:
                raise ScheduleError(f"choice row for {k} must have length {self.horizon}")

    @property
    def choices(self) -> dict[str, tuple[int, ...]]:
        return dict(self.choice)

    def choice_at(self, control: str | None, t: int) -> int:
        if control is None:
            return 0
        return self.choices.get(control, (0,) * self.horizon)[t]

    def validate(self, circuit: Circuit) -> None:
        if len(self.latch) != len(circuit.ffs):
            raise ScheduleError(
                f"schedule has {len(self.latch)} latch rows, circuit has {len(circuit.ffs)} flip-flops"
            )
        by_clock: dict[str, tuple] = {}
        for i, ff in enumerate(circuit.ffs):
            row = self.latch[i]
            ref = circuit.clock_of(i)
            if not isinstance(ref, Free):
                want = tuple(ref.has_edge(t) for t in range(self.horizon))
                if row != want:
                    raise ScheduleError(f"latch bits of {ff.name} disagree with clock {ff.clock}")
            if by_clock.setdefault(ff.clock, row) != row:
                raise ScheduleError(f"flip-flops on clock {ff.clock} must latch together")
        arity = circuit.control_arity()
        for k, row in self.choice:
            if k not in circuit.control_ports:
                raise ScheduleError(f"{k} is not a control port")
            limit = arity.get(k, 1)
            for t, c in enumerate(row):
                if not 0 <= c < limit:
                    raise ScheduleError(f"choice {c} for {k} at step {t} out of range [0, {limit})")

    def prefix(self, horizon: int) -> "Schedule":
        return Schedule(
            horizon,
            tuple(r[:horizon] for r in self.latch),
            tuple((k, v[:horizon]) for k, v in self.choice),
        )

    def to_spec(self, circuit: Circuit) -> str:
        """Render as ``F=1000;sel=0110`` (flip-flop latch bits, control choices)."""
        parts = [
            f"{ff.name}=" + "".join("1" if b else "0" for b in self.latch[i])
            for i, ff in enumerate(circuit.ffs)
        ]
        parts += [f"{k}=" + "".join(map(str, v)) for k, v in self.choice]
        return ";".join(parts)


def schedule_from_clocks(
    circuit: Circuit,
    horizon: int,
    selector_choices: Mapping[str, Sequence[int]] | None = None,
    latches: Mapping[str, Sequence] | None = None,
) -> Schedule:
    """Expand clock declarations into latch/hold bits.

    ``latches`` supplies bit rows for flip-flops (by flip-flop or clock
    name); it is required for flip-flops on free clocks and must agree with
    fixed clocks elsewhere.  Missing control choices default to alternative 0.
    """
    if horizon < 1:
        raise ScheduleError("horizon must be positive")
    latches = dict(latches or {})
    clock_names = {c.name for c in circuit.clocks}
    ff_names = {ff.name for ff in circuit.ffs}
    for key in latches:
        if key not in clock_names and key not in ff_names:
            raise ScheduleError(f"{key} names neither a flip-flop nor a clock")
    rows = []
    for i, ff in enumerate(circuit.ffs):
        given = latches.get(ff.name, latches.get(ff.clock))
        ref = circuit.clock_of(i)
        if given is not None:
            row = tuple(_bit(b) for b in given)
            if len(row) != horizon:
                raise ScheduleError(f"latch bits for {ff.name} must have length {horizon}")
        elif isinstance(ref, Free):
            raise ScheduleError(f"flip-flop {ff.name} is on free clock {ff.clock}; latch bits required")
        else:
            row = tuple(ref.has_edge(t) for t in range(horizon))
        rows.append(row)
    choice = {}
    for k, v in (selector_choices or {}).items():
        v = tuple(int(x) for x in v)
        if len(v) != horizon:
            raise ScheduleError(f"choices for {k} must have length {horizon}")
        choice[k] = v
    sched = Schedule(horizon, tuple(rows), choice)
    sched.validate(circuit)
    return sched


def _bit(b) -> bool:
    if isinstance(b, str):
        if b not in "01" or len(b) != 1:
            raise ScheduleError(f"latch bit must be 0 or 1, got {b!r}")
        return b == "1"
    return bool(b)
