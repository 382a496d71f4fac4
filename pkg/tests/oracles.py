"""Reference computations kept independent of the package's propagation code."""

import networkx as nx

from refform.model import DataSource
from refform.order import check_time_preservation, replay_witness, unified_image


def unrolled_graph(circuit, schedule):
    """Explicit time-unrolled graph: ("in", p, t), ("ff", i, t) = contents during t, ("out", t)."""
    g = nx.DiGraph()
    H = schedule.horizon
    choices = schedule.choices

    def chosen(sel, t):
        k = choices.get(sel.control, [0] * H)[t] if sel.control else 0
        return sel.alternatives[k]

    def node(src, t):
        return ("in", src.port, t) if isinstance(src, DataSource) else ("ff", src.index, t)

    for t in range(H):
        g.add_node(("out", t))
        for p in circuit.data_ports:
            g.add_node(("in", p, t))
        for s in chosen(circuit.output, t):
            g.add_edge(node(s, t), ("out", t))
        for i, ff in enumerate(circuit.ffs):
            if schedule.latch[i][t]:
                for s in chosen(ff.data_input, t):
                    g.add_edge(node(s, t), ("ff", i, t + 1))
            else:
                g.add_edge(("ff", i, t), ("ff", i, t + 1))
    return g


def reachability_form(circuit, schedule):
    """(past, current) per step as plain Python sets, by graph ancestry."""
    g = unrolled_graph(circuit, schedule)
    past, current = [], []
    for t in range(schedule.horizon):
        anc = nx.ancestors(g, ("out", t))
        past.append({(n[1], n[2]) for n in anc if n[0] == "in" and n[2] < t})
        current.append({n[1] for n in anc if n[0] == "in" and n[2] == t})
    return past, current


def as_sets(form):
    return [set(map(tuple, p)) for p in form.past], [set(c) for c in form.current]


def _nx_acyclic(forms):
    g = nx.DiGraph()
    for f in forms:
        g.add_nodes_from(f.past)
        g.add_edges_from((f.past[t - 1], f.past[t]) for t in range(1, f.horizon) if f.past[t - 1] != f.past[t])
    return nx.is_directed_acyclic_graph(g), g


def assert_sound(forms):
    """Verdict agrees with networkx; orders are genuine partial orders; witnesses replay."""
    v = check_time_preservation(forms)
    acyclic, g = _nx_acyclic(forms)
    assert v.preserving == acyclic
    if v.preserving:
        order = v.order
        nodes = list(order.nodes)
        assert set(nodes) == unified_image(forms)
        closure = {(u, w) for u in nodes for w in nx.descendants(g, u) | {u}}
        assert order.pairs() == closure
        for u in nodes:
            assert order.leq(u, u)
            for w in nodes:
                if order.leq(u, w) and order.leq(w, u):
                    assert u == w
                for x in nodes:
                    if order.leq(u, w) and order.leq(w, x):
                        assert order.leq(u, x)
        for f in forms:
            for t1 in range(f.horizon):
                for t2 in range(t1, f.horizon):
                    assert order.leq(f.past[t1], f.past[t2])
    else:
        assert replay_witness(v)
        cycle = [e.source for e in v.witness]
        assert len(cycle) >= 2 and len(set(cycle)) == len(cycle)
        # no cycle in the graph is shorter than the witness
        assert len(cycle) == min(len(c) for c in nx.simple_cycles(g))
    return v
