"""Time preservation of sets of referring forms.

The values taken by a set of forms are ordered by their appearance in time:
whenever one form moves from value ``u`` to a different value ``v`` an edge
``u -> v`` is recorded.  The set is time preserving exactly when this
relation has no cycle through two or more distinct values; its
reflexive-transitive closure is then the least partial order under which
every form is monotone.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping, NamedTuple, Sequence, Union

from .influence import BudgetExceeded, Compiled, DEFAULT_BUDGET, _restricted_columns, budget_from_env
from .model import Circuit, ReferringForm, RefSet, Schedule

__all__ = [
    "Evidence",
    "PrecedenceGraph",
    "PartialOrder",
    "WitnessEdge",
    "TimePreservationVerdict",
    "LemmaResult",
    "unified_image",
    "precedence_graph",
    "circuit_precedence_graph",
    "check_time_preservation",
    "replay_witness",
    "lemma_check",
]

_EVIDENCE_PER_EDGE = 2


class Evidence(NamedTuple):
    """Form ``form`` takes the edge's source value at ``t1`` and target at ``t2``."""

    form: int
    t1: int
    t2: int


def _key(value) -> tuple:
    return value.sort_key() if isinstance(value, RefSet) else (0, value)


@dataclass(frozen=True)
class PrecedenceGraph:
    nodes: frozenset
    edges: Mapping[tuple, tuple[Evidence, ...]]
    forms: tuple[ReferringForm, ...] = ()
    schedules: tuple[Schedule, ...] | None = None

    def successors(self) -> dict:
        adj = {n: [] for n in self.nodes}
        for u, v in self.edges:
            adj[u].append(v)
        for n in adj:
            adj[n].sort(key=_key)
        return adj


class _EdgeCollector:
    def __init__(self):
        self.nodes = set()
        self.edges: dict[tuple, list[Evidence]] = {}

    def add(self, u, v, ev: Evidence) -> None:
        evs = self.edges.setdefault((u, v), [])
        if len(evs) < _EVIDENCE_PER_EDGE and all(e.form != ev.form for e in evs):
            evs.append(ev)

    def add_sequence(self, values: Sequence, form_id: int) -> None:
        self.nodes.update(values)
        for t in range(1, len(values)):
            if values[t] != values[t - 1]:
                self.add(values[t - 1], values[t], Evidence(form_id, t - 1, t))

    def graph(self, forms=(), schedules=None) -> PrecedenceGraph:
        return PrecedenceGraph(
            frozenset(self.nodes),
            {k: tuple(v) for k, v in self.edges.items()},
            tuple(forms),
            None if schedules is None else tuple(schedules),
        )


def _canonical(forms: Iterable[ReferringForm]) -> tuple[ReferringForm, ...]:
    out = tuple(sorted(set(forms), key=lambda f: f.sort_key()))
    if not out:
        raise ValueError("need at least one referring form")
    return out


def unified_image(forms: Iterable[ReferringForm]) -> frozenset[RefSet]:
    """All values any of ``forms`` takes at any step."""
    forms = _canonical(forms)
    return frozenset(v for f in forms for v in f.past)


def precedence_graph(forms: Iterable[ReferringForm]) -> PrecedenceGraph:
    """Edges between consecutive distinct values of each form.

    Forms are deduplicated and sorted; evidence form ids index that order.
    """
    forms = _canonical(forms)
    col = _EdgeCollector()
    for i, f in enumerate(forms):
        col.add_sequence(f.past, i)
    return col.graph(forms)


def circuit_precedence_graph(
    circuit: Circuit,
    horizon: int,
    *,
    budget: int | None = None,
    fixed_choices: Mapping | None = None,
) -> PrecedenceGraph:
    """Precedence graph of every referring form of ``circuit`` at ``horizon``.

    Edges only involve consecutive steps, so the walk keeps one state per
    (flip-flop contents, last value) instead of one per form.  Each edge is
    witnessed by a concrete form: the first schedule prefix reaching the
    edge, completed with the first admissible column at every later step.
    """
    if budget is None:
        budget = budget_from_env(DEFAULT_BUDGET)
    comp = Compiled(circuit)
    per_step = [_restricted_columns(comp, t, fixed_choices) for t in range(horizon)]
    if any(not cols for cols in per_step):
        raise ValueError("no admissible schedule")
    card = 1
    for cols in per_step:
        card *= len(cols)

    nodes: set[int] = set()
    edge_prefix: dict[tuple, list[tuple]] = {}
    frontier: dict[tuple, tuple] = {((0,) * len(comp.ff_sel), None): ()}
    work = 0
    for t, cols in enumerate(per_step):
        work += len(frontier) * len(cols)
        if work > budget:
            raise BudgetExceeded(
                f"precedence walk exceeded budget {budget} at step {t} "
                f"(schedule space has {card} schedules)",
                card,
            )
        nxt: dict[tuple, tuple] = {}
        for (contents, last), rep in frontier.items():
            for col in cols:
                p, _, after = comp.step(contents, t, col)
                nodes.add(p)
                prefix = rep + (col,)
                if last is not None and p != last:
                    reps = edge_prefix.setdefault((last, p), [])
                    if len(reps) < _EVIDENCE_PER_EDGE:
                        reps.append(prefix)
                key = (after, p)
                if key not in nxt:
                    nxt[key] = prefix
        frontier = nxt

    forms: dict[tuple, int] = {}
    form_list, sched_list = [], []
    col = _EdgeCollector()
    col.nodes.update(comp.refset(m) for m in nodes)
    for (u, v), reps in sorted(edge_prefix.items()):
        for prefix in reps:
            full = prefix + tuple(per_step[s][0] for s in range(len(prefix), horizon))
            past, cur, _ = comp.run(full)
            if (past, cur) not in forms:
                forms[(past, cur)] = len(form_list)
                form_list.append(comp.form(past, cur))
                sched_list.append(comp.schedule_of(full))
            t2 = len(prefix) - 1
            col.add(comp.refset(u), comp.refset(v), Evidence(forms[(past, cur)], t2 - 1, t2))
    return col.graph(form_list, sched_list)


# --- strongly connected components ----------------------------------------------


def _tarjan(nodes: Sequence, adj: Mapping) -> list[list]:
    """SCCs in reverse topological order (sinks first); iterative."""
    index: dict = {}
    low: dict = {}
    on_stack: set = set()
    stack: list = []
    out: list[list] = []
    counter = 0
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(adj[root]))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, it = work[-1]
            advanced = False
            for succ in it:
                if succ not in index:
                    index[succ] = low[succ] = counter
                    counter += 1
                    stack.append(succ)
                    on_stack.add(succ)
                    work.append((succ, iter(adj[succ])))
                    advanced = True
                    break
                if succ in on_stack:
                    low[node] = min(low[node], index[succ])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == node:
                        break
                out.append(comp)
    return out


class PartialOrder:
    """Reachability order on the nodes of an acyclic precedence graph."""

    def __init__(self, nodes: Sequence, reach: Mapping[Hashable, int]):
        self.nodes = tuple(nodes)
        self._pos = {n: i for i, n in enumerate(self.nodes)}
        self._reach = dict(reach)

    def leq(self, u, v) -> bool:
        return bool(self._reach[u] >> self._pos[v] & 1)

    def __contains__(self, pair) -> bool:
        u, v = pair
        return u in self._pos and v in self._pos and self.leq(u, v)

    def pairs(self) -> set[tuple]:
        out = set()
        for u in self.nodes:
            r = self._reach[u]
            for i, v in enumerate(self.nodes):
                if r >> i & 1:
                    out.add((u, v))
        return out

    def __len__(self) -> int:
        return sum(bin(r).count("1") for r in self._reach.values())


@dataclass(frozen=True)
class WitnessEdge:
    source: object
    target: object
    form: int
    t1: int
    t2: int

    def to_json(self) -> dict:
        def enc(v):
            return v.to_json() if isinstance(v, RefSet) else v

        return {"from": enc(self.source), "to": enc(self.target), "form": self.form, "t1": self.t1, "t2": self.t2}


@dataclass(frozen=True)
class TimePreservationVerdict:
    preserving: bool
    order: PartialOrder | None
    witness: tuple[WitnessEdge, ...] | None
    forms: tuple[ReferringForm, ...] = field(default=(), repr=False)
    schedules: tuple[Schedule, ...] | None = field(default=None, repr=False)

    def __bool__(self) -> bool:
        return self.preserving

    def to_json(self) -> dict:
        out = {
            "preserving": self.preserving,
            "witness": None if self.witness is None else [e.to_json() for e in self.witness],
        }
        if self.witness is not None:
            used = sorted({e.form for e in self.witness})
            out["forms"] = {str(i): self.forms[i].to_json() for i in used}
        return out


def check_time_preservation(
    forms: Union[Iterable[ReferringForm], PrecedenceGraph],
) -> TimePreservationVerdict:
    """Decide whether the unified image admits a partial order every form respects."""
    graph = forms if isinstance(forms, PrecedenceGraph) else precedence_graph(forms)
    nodes = sorted(graph.nodes, key=_key)
    adj = graph.successors()
    sccs = _tarjan(nodes, adj)
    cyclic = [c for c in sccs if len(c) > 1]
    if not cyclic:
        pos = {n: i for i, n in enumerate(nodes)}
        reach: dict = {}
        for (n,) in sccs:
            r = 1 << pos[n]
            for s in adj[n]:
                r |= reach[s]
            reach[n] = r
        return TimePreservationVerdict(True, PartialOrder(nodes, reach), None, graph.forms, graph.schedules)
    cycle = _shortest_cycle(graph, adj, cyclic)
    return TimePreservationVerdict(False, None, cycle, graph.forms, graph.schedules)


def _shortest_cycle(graph: PrecedenceGraph, adj: Mapping, cyclic: list[list]) -> tuple[WitnessEdge, ...]:
    two = [
        (u, v)
        for (u, v) in graph.edges
        if (v, u) in graph.edges and _key(u) < _key(v)
    ]
    if two:
        best = None
        for u, v in two:
            for a in graph.edges[(u, v)]:
                for b in graph.edges[(v, u)]:
                    # prefer two distinct forms, non-empty values, each value seen at two times
                    score = (
                        a.form == b.form,
                        (not u) + (not v),
                        (a.t1 == b.t2) + (a.t2 == b.t1),
                        _key(u),
                        _key(v),
                        a,
                        b,
                    )
                    if best is None or score < best[0]:
                        best = (score, u, v, a, b)
        _, u, v, a, b = best
        return (WitnessEdge(u, v, *a), WitnessEdge(v, u, *b))

    best_path = None
    for comp in cyclic:
        members = set(comp)
        for s in sorted(comp, key=_key):
            prev = {s: None}
            q = deque([s])
            found = None
            while q and found is None:
                n = q.popleft()
                for m in adj[n]:
                    if m not in members:
                        continue
                    if m == s:
                        found = n
                        break
                    if m not in prev:
                        prev[m] = n
                        q.append(m)
            if found is None:
                continue
            path = [found]
            while path[-1] != s:
                path.append(prev[path[-1]])
            path.reverse()
            if best_path is None or len(path) < len(best_path):
                best_path = path
    cyc = best_path + [best_path[0]]
    return tuple(WitnessEdge(u, v, *graph.edges[(u, v)][0]) for u, v in zip(cyc, cyc[1:]))


def replay_witness(verdict: TimePreservationVerdict) -> bool:
    """Check that every witness edge is realized by the form it cites and closes a cycle."""
    if verdict.witness is None:
        return False
    w = verdict.witness
    if len(w) < 2 or len({e.source for e in w}) != len(w):
        return False
    for i, e in enumerate(w):
        if e.target != w[(i + 1) % len(w)].source:
            return False
        if not 0 <= e.form < len(verdict.forms) or not e.t1 < e.t2:
            return False
        f = verdict.forms[e.form]
        if f.past[e.t1] != e.source or f.past[e.t2] != e.target:
            return False
    return True


# --- monotone references ------------------------------------------------------


@dataclass(frozen=True)
class LemmaResult:
    holds: bool
    pair: tuple[int, int] | None = None
    port: str | None = None

    def __bool__(self) -> bool:
        return self.holds


def lemma_check(form: ReferringForm, per_port: bool = False) -> LemmaResult:
    """Once a step refers to input at time l, every later step refers to some time >= l.

    With ``per_port`` the condition is checked separately for each data port
    appearing in the form.
    """
    if per_port:
        ports = sorted(set().union(*(rs.ports() for rs in form.past)))
        for port in ports:
            res = _monotone([rs.max_time(port) for rs in form.past])
            if not res:
                return LemmaResult(False, res.pair, port)
        return LemmaResult(True)
    return _monotone([rs.max_time() for rs in form.past])


def _monotone(latest: Sequence[int | None]) -> LemmaResult:
    best = None
    for t2, m in enumerate(latest):
        if best is not None and (m is None or m < best):
            t1 = next(t for t in range(t2) if latest[t] is not None and latest[t] > (-1 if m is None else m))
            return LemmaResult(False, (t1, t2))
        if m is not None and (best is None or m > best):
            best = m
    return LemmaResult(True)
