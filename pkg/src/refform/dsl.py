"""Text format for circuits (``.rfc`` files): parser and emitter.

Grammar::

    circuit   := "circuit" ident "{" item* "}"
    item      := "input" ident ";"
               | "control" ident ";"
               | "clock" ident ( "period" int "offset" int
                               | "edges" "[" int ("," int)* "]"
                               | "free" ) ";"
               | "ff" ident "clock" ident driver ";"
               | "output" driver ";"
    driver    := "from" sourceset | "select" ident "{" sourceset ("," sourceset)* "}"
    sourceset := "{" [ ident ("," ident)* ] "}"

Line comments start with ``#`` or ``//``.  Names may be referenced before
they are declared.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

from .model import (
    Circuit,
    CircuitError,
    ClockDecl,
    DataSource,
    ExplicitEdges,
    FFSource,
    FlipFlop,
    Free,
    Periodic,
    Selector,
)

__all__ = ["Span", "DSLError", "parse", "emit", "KEYWORDS"]

KEYWORDS = frozenset(
    ["circuit", "input", "control", "clock", "period", "offset", "edges", "free", "ff", "from", "output", "select"]
)


@dataclass(frozen=True)
class Span:
    start: int
    end: int
    line: int
    column: int

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


class DSLError(ValueError):
    """Parse or validation failure, always located by a span in the input."""

    def __init__(self, message: str, span: Span):
        super().__init__(f"{span}: {message}")
        self.message = message
        self.span = span


_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>(?:\#|//)[^\n]*)
  | (?P<ident>[A-Za-z][A-Za-z0-9_]*)
  | (?P<int>[0-9]+)
  | (?P<punct>[{};,\[\]])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Tok:
    kind: str  # ident, kw, int, punct, eof
    text: str
    span: Span


def _span(text: str, start: int, end: int) -> Span:
    line = text.count("\n", 0, start) + 1
    col = start - (text.rfind("\n", 0, start) + 1) + 1
    return Span(start, end, line, col)


def _lex(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise DSLError(f"unexpected character {text[pos]!r}", _span(text, pos, pos + 1))
        kind = m.lastgroup
        if kind == "ident" and m.group() in KEYWORDS:
            kind = "kw"
        if kind not in ("ws", "comment"):
            toks.append(_Tok(kind, m.group(), _span(text, m.start(), m.end())))
        pos = m.end()
    toks.append(_Tok("eof", "", _span(text, len(text), len(text))))
    return toks


@dataclass
class _Driver:
    control: Union[_Tok, None]
    alternatives: list  # list of list[_Tok]
    span: Span


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _lex(text)
        self.i = 0

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def next(self) -> _Tok:
        tok = self.toks[self.i]
        if tok.kind != "eof":
            self.i += 1
        return tok

    def expect(self, kind: str, text: str | None = None) -> _Tok:
        tok = self.next()
        if tok.kind != kind or (text is not None and tok.text != text):
            want = repr(text) if text else kind
            got = "end of input" if tok.kind == "eof" else repr(tok.text)
            raise DSLError(f"expected {want}, got {got}", tok.span)
        return tok

    def accept(self, kind: str, text: str | None = None) -> _Tok | None:
        tok = self.peek()
        if tok.kind == kind and (text is None or tok.text == text):
            return self.next()
        return None

    def ident(self) -> _Tok:
        tok = self.peek()
        if tok.kind == "kw":
            raise DSLError(f"{tok.text!r} is a reserved keyword", tok.span)
        return self.expect("ident")

    def integer(self) -> tuple[int, _Tok]:
        tok = self.expect("int")
        return int(tok.text), tok

    def sourceset(self) -> list[_Tok]:
        self.expect("punct", "{")
        names = []
        if not self.accept("punct", "}"):
            names.append(self.ident())
            while self.accept("punct", ","):
                names.append(self.ident())
            self.expect("punct", "}")
        return names

    def driver(self) -> _Driver:
        start = self.peek().span
        if self.accept("kw", "from"):
            return _Driver(None, [self.sourceset()], start)
        if self.accept("kw", "select"):
            control = self.ident()
            self.expect("punct", "{")
            alts = [self.sourceset()]
            while self.accept("punct", ","):
                alts.append(self.sourceset())
            self.expect("punct", "}")
            return _Driver(control, alts, start)
        tok = self.peek()
        raise DSLError(f"expected 'from' or 'select', got {tok.text or 'end of input'!r}", tok.span)

    def circuit(self) -> Circuit:
        self.expect("kw", "circuit")
        name = self.ident()
        self.expect("punct", "{")
        decl: dict[str, tuple[str, _Tok]] = {}
        inputs, controls, clocks, ffs = [], [], [], []
        output = None

        def declare(tok: _Tok, kind: str):
            if tok.text in decl:
                prev_kind = decl[tok.text][0]
                if kind == prev_kind == "clock":
                    raise DSLError(f"clock redefinition {tok.text}", tok.span)
                raise DSLError(f"duplicate name {tok.text}", tok.span)
            decl[tok.text] = (kind, tok)

        while not self.accept("punct", "}"):
            tok = self.peek()
            if self.accept("kw", "input"):
                t = self.ident()
                declare(t, "input")
                inputs.append(t.text)
            elif self.accept("kw", "control"):
                t = self.ident()
                declare(t, "control")
                controls.append(t.text)
            elif self.accept("kw", "clock"):
                t = self.ident()
                declare(t, "clock")
                clocks.append((t, self.clock_body()))
            elif self.accept("kw", "ff"):
                t = self.ident()
                declare(t, "ff")
                self.expect("kw", "clock")
                clk = self.ident()
                ffs.append((t, clk, self.driver()))
            elif self.accept("kw", "output"):
                if output is not None:
                    raise DSLError("more than one output", tok.span)
                output = (tok, self.driver())
            else:
                got = "end of input" if tok.kind == "eof" else repr(tok.text)
                raise DSLError(f"expected a declaration or '}}', got {got}", tok.span)
            self.expect("punct", ";")
        end = self.expect("eof")

        if not inputs:
            raise DSLError(f"circuit {name.text} declares no input", name.span)
        if output is None:
            raise DSLError(f"circuit {name.text} has no output", end.span)
        ff_index = {t.text: i for i, (t, _, _) in enumerate(ffs)}
        arity: dict[str, int] = {}

        def resolve(drv: _Driver) -> Selector:
            ctl = None
            if drv.control is not None:
                ctl = drv.control.text
                kind = decl.get(ctl, (None,))[0]
                if kind is None:
                    raise DSLError(f"unknown identifier {ctl}", drv.control.span)
                if kind != "control":
                    raise DSLError(f"{ctl} is not a control port", drv.control.span)
                n = len(drv.alternatives)
                if arity.setdefault(ctl, n) != n:
                    raise DSLError(
                        f"selector arity mismatch on {ctl}: {n} alternatives, expected {arity[ctl]}",
                        drv.span,
                    )
            alts = []
            for names in drv.alternatives:
                alt = set()
                for t in names:
                    kind = decl.get(t.text, (None,))[0]
                    if kind is None:
                        raise DSLError(f"unknown identifier {t.text}", t.span)
                    if kind == "input":
                        alt.add(DataSource(t.text))
                    elif kind == "ff":
                        alt.add(FFSource(ff_index[t.text]))
                    else:
                        raise DSLError(f"{t.text} is a {kind}, not a data source", t.span)
                alts.append(frozenset(alt))
            return Selector(tuple(alts), ctl)

        flipflops = []
        for t, clk, drv in ffs:
            kind = decl.get(clk.text, (None,))[0]
            if kind is None:
                raise DSLError(f"unknown identifier {clk.text}", clk.span)
            if kind != "clock":
                raise DSLError(f"{clk.text} is not a clock", clk.span)
            flipflops.append(FlipFlop(t.text, clk.text, resolve(drv)))
        out = resolve(output[1])
        try:
            return Circuit(
                data_ports=tuple(inputs),
                ffs=tuple(flipflops),
                output=out,
                control_ports=tuple(controls),
                clocks=tuple(ClockDecl(t.text, ref) for t, ref in clocks),
                name=name.text,
            )
        except CircuitError as exc:
            raise DSLError(str(exc), name.span) from None

    def clock_body(self):
        tok = self.peek()
        if self.accept("kw", "period"):
            period, ptok = self.integer()
            self.expect("kw", "offset")
            offset, otok = self.integer()
            if period < 1:
                raise DSLError("clock period must be positive", ptok.span)
            if offset >= period:
                raise DSLError(f"clock offset must be below the period {period}", otok.span)
            return Periodic(period, offset)
        if self.accept("kw", "edges"):
            self.expect("punct", "[")
            edges = []
            if not self.accept("punct", "]"):
                edges.append(self.integer()[0])
                while self.accept("punct", ","):
                    edges.append(self.integer()[0])
                self.expect("punct", "]")
            return ExplicitEdges(frozenset(edges))
        if self.accept("kw", "free"):
            return Free()
        got = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise DSLError(f"expected 'period', 'edges' or 'free', got {got}", tok.span)


def parse(text: Union[str, bytes]) -> Circuit:
    """Parse one circuit description; raises :class:`DSLError` on any defect."""
    if isinstance(text, (bytes, bytearray)):
        try:
            text = bytes(text).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise DSLError("input is not valid UTF-8", Span(exc.start, exc.end, 1, exc.start + 1)) from None
    return _Parser(text).circuit()


def _sourceset(c: Circuit, sources) -> str:
    return "{" + ", ".join(c.source_name(s) for s in c.sorted_sources(sources)) + "}"


def _driver(c: Circuit, sel: Selector) -> str:
    if sel.control is None:
        return "from " + _sourceset(c, sel.alternatives[0])
    return f"select {sel.control} {{ " + ", ".join(_sourceset(c, a) for a in sel.alternatives) + " }"


def _clock(ref) -> str:
    if isinstance(ref, Periodic):
        return f"period {ref.period} offset {ref.offset}"
    if isinstance(ref, ExplicitEdges):
        return "edges [" + ", ".join(map(str, sorted(ref.edges))) + "]"
    return "free"


_IDENT = re.compile(r"[A-Za-z][A-Za-z0-9_]*")


def emit(c: Circuit) -> str:
    """Canonical text for ``c``; raises ``ValueError`` for names the format cannot spell."""
    names = [c.name, *c.data_ports, *c.control_ports, *(d.name for d in c.clocks), *(ff.name for ff in c.ffs)]
    for n in names:
        if not _IDENT.fullmatch(n) or n in KEYWORDS:
            raise ValueError(f"{n!r} is not a valid identifier in circuit text")
    lines = [f"circuit {c.name} {{"]
    lines += [f"  input {p};" for p in c.data_ports]
    lines += [f"  control {p};" for p in c.control_ports]
    lines += [f"  clock {d.name} {_clock(d.ref)};" for d in c.clocks]
    lines += [f"  ff {ff.name} clock {ff.clock} {_driver(c, ff.data_input)};" for ff in c.ffs]
    lines.append(f"  output {_driver(c, c.output)};")
    lines.append("}")
    return "\n".join(lines) + "\n"
