"""Text renderings: referring-form tables and the time-unrolled circuit graph."""

from __future__ import annotations

from .influence import restriction_map
from .model import Circuit, DataSource, ReferringForm, Schedule

__all__ = ["form_table", "ascii_timeline", "dot_graph"]


def _cur(ports) -> str:
    return "{" + ", ".join(sorted(ports)) + "}"


def form_table(form: ReferringForm) -> str:
    """One row per step: ``step | past occurrences | current ports``."""
    rows = [("step", "past", "current")]
    rows += [(str(t), str(form.past[t]), _cur(form.current[t])) for t in range(form.horizon)]
    w0 = max(len(r[0]) for r in rows)
    w1 = max(len(r[1]) for r in rows)
    lines = [f"{a:>{w0}} | {b:<{w1}} | {c}" for a, b, c in rows]
    lines.insert(1, "-" * w0 + "-+-" + "-" * w1 + "-+-" + "-" * max(len(r[2]) for r in rows))
    return "\n".join(line.rstrip() for line in lines) + "\n"


def ascii_timeline(circuit: Circuit, schedule: Schedule) -> str:
    """Latch (``L``) / hold (``.``) marks per flip-flop and control choices per step."""
    H = schedule.horizon
    names = [ff.name for ff in circuit.ffs] + [k for k, _ in schedule.choice]
    width = max([4] + [len(n) for n in names])
    cell = max(2, len(str(H - 1)) + 1)
    lines = [f"{'step':<{width}} " + "".join(f"{t:>{cell}}" for t in range(H))]
    for i, ff in enumerate(circuit.ffs):
        marks = "".join(f"{'L' if b else '.':>{cell}}" for b in schedule.latch[i])
        lines.append(f"{ff.name:<{width}} " + marks)
    for k, row in schedule.choice:
        lines.append(f"{k:<{width}} " + "".join(f"{c:>{cell}}" for c in row))
    form = restriction_map(circuit, schedule)
    lines.append("")
    for t in range(H):
        lines.append(f"O@{t} <- past {form.past[t]} current {_cur(form.current[t])}")
    return "\n".join(lines) + "\n"


def _q(s: str) -> str:
    return '"' + s.replace('"', '\\"') + '"'


def dot_graph(circuit: Circuit, schedule: Schedule) -> str:
    """Graphviz description of the unrolled graph under ``schedule``.

    Node ``F@t`` is flip-flop ``F`` during step ``t`` (labelled ``L`` when it
    latches at ``t``, ``H`` when it holds); ``F@t+1`` is fed from the sources
    it latches or from ``F@t``.  ``O@t`` is fed from the chosen output sources.
    """
    H = schedule.horizon
    lines = [f"digraph {_q(circuit.name)} {{", "  rankdir=LR;", "  node [shape=box];"]
    for t in range(H):
        col = [f"{p}@{t}" for p in circuit.data_ports]
        col += [f"{ff.name}@{t}" for ff in circuit.ffs] + [f"O@{t}"]
        for p in circuit.data_ports:
            lines.append(f"  {_q(f'{p}@{t}')} [shape=ellipse];")
        for i, ff in enumerate(circuit.ffs):
            mark = "L" if schedule.latch[i][t] else "H"
            lines.append(f"  {_q(f'{ff.name}@{t}')} [label={_q(f'{ff.name}@{t} {mark}')}];")
        lines.append(f"  {_q(f'O@{t}')} [shape=doublecircle];")
        lines.append("  { rank=same; " + " ".join(_q(n) for n in col) + " }")

    def src(s, t):
        return f"{s.port}@{t}" if isinstance(s, DataSource) else f"{circuit.ffs[s.index].name}@{t}"

    for t in range(H):
        out = circuit.output
        alt = out.alternatives[schedule.choice_at(out.control, t)]
        for s in circuit.sorted_sources(alt):
            lines.append(f"  {_q(src(s, t))} -> {_q(f'O@{t}')};")
        if t + 1 == H:
            continue
        for i, ff in enumerate(circuit.ffs):
            target = _q(f"{ff.name}@{t + 1}")
            if schedule.latch[i][t]:
                sel = ff.data_input
                alt = sel.alternatives[schedule.choice_at(sel.control, t)]
                for s in circuit.sorted_sources(alt):
                    lines.append(f"  {_q(src(s, t))} -> {target} [label=latch];")
            else:
                lines.append(f"  {_q(f'{ff.name}@{t}')} -> {target} [label=hold, style=dashed];")
    lines.append("}")
    return "\n".join(lines) + "\n"
