"""Turing machines, a reference simulator, and their compilation to TM-layer tiles.

Square semantics: inside an n-square the tape has ``2^n + 1`` cells, starts
blank with the head on the centre cell in the start state, and free row ``t``
(0-based) shows the configuration after ``t`` steps.  Moves off either end are
clamped (the head stays put).  A halted or stuck machine copies its
configuration forward.  Nondeterministic choices are tried in the order the
transitions were declared; the first one is the canonical path.
"""
from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from .errors import CompileError, ConfigError

MOVES = ("L", "R", "S")
RESERVED_TOKENS = frozenset({"s0", "s0q0", "x", "|", "-"})
_BAD_CHARS = re.compile(r"[@<>,:=\s]")


@dataclass(frozen=True)
class TMSpec:
    states: tuple
    alphabet: tuple
    blank: str
    start: str
    accept: str
    reject: str
    transitions: Mapping  # (state, symbol) -> tuple of (state, symbol, move)
    max_branching: int = 2
    name: str = "tm"
    meta: Mapping = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "alphabet", tuple(self.alphabet))
        object.__setattr__(self, "transitions",
                           {k: tuple(tuple(t) for t in v) for k, v in dict(self.transitions).items()})
        for q in (self.start, self.accept, self.reject):
            if q not in self.states:
                raise ConfigError(f"state {q!r} not declared")
        if self.blank not in self.alphabet:
            raise ConfigError(f"blank {self.blank!r} not in the alphabet")
        for (q, s), outs in self.transitions.items():
            if q in (self.accept, self.reject):
                raise ConfigError(f"halting state {q!r} has outgoing transitions")
            if q not in self.states or s not in self.alphabet:
                raise ConfigError(f"transition from unknown ({q!r}, {s!r})")
            if len(outs) > self.max_branching:
                raise ConfigError(f"({q}, {s}) branches {len(outs)} ways, bound is {self.max_branching}")
            for q2, s2, mv in outs:
                if q2 not in self.states or s2 not in self.alphabet or mv not in MOVES:
                    raise ConfigError(f"bad transition ({q}, {s}) -> ({q2}, {s2}, {mv})")

    @property
    def deterministic(self) -> bool:
        return all(len(v) <= 1 for v in self.transitions.values())

    def step_options(self, q, s):
        return self.transitions.get((q, s), ())

    def halting(self, q) -> bool:
        return q in (self.accept, self.reject)

    # -- text format ---------------------------------------------------------

    def to_text(self) -> str:
        lines = [f"name: {self.name}", "states: " + " ".join(self.states),
                 "alphabet: " + " ".join(self.alphabet), f"blank: {self.blank}",
                 f"start: {self.start}", f"accept: {self.accept}", f"reject: {self.reject}"]
        for (q, s), outs in self.transitions.items():
            lines += [f"{q},{s} -> {q2},{s2},{mv}" for q2, s2, mv in outs]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "TMSpec":
        head: dict = {}
        trans: dict = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "->" in line:
                lhs, rhs = (p.strip() for p in line.split("->"))
                try:
                    q, s = (p.strip() for p in lhs.split(","))
                    q2, s2, mv = (p.strip() for p in rhs.split(","))
                except ValueError:
                    raise ConfigError(f"line {lineno}: expected 'q,s -> q2,s2,M'") from None
                trans.setdefault((q, s), []).append((q2, s2, mv))
                continue
            key, _, val = line.partition(":")
            key = key.strip()
            if key == "start/accept/reject":
                head["start"], head["accept"], head["reject"] = val.split()
            else:
                head[key] = val.strip()
        try:
            return cls(states=head["states"].split(), alphabet=head["alphabet"].split(),
                       blank=head.get("blank", head["alphabet"].split()[0]), start=head["start"],
                       accept=head["accept"], reject=head["reject"], transitions=trans,
                       max_branching=int(head.get("branching", max([2] + [len(v) for v in trans.values()]))),
                       name=head.get("name", "tm"))
        except KeyError as e:
            raise ConfigError(f"missing field {e.args[0]!r}") from None


# -- reference simulator ----------------------------------------------------------


@dataclass(frozen=True)
class Config:
    tape: tuple  # (offset, symbols) for unbounded runs; offset 0 when bounded
    head: int
    state: str

    def symbols(self, blank) -> str:
        """Tape contents with outer blanks trimmed, blanks inside shown as the blank symbol."""
        syms = list(self.tape[1])
        while syms and syms[0] == blank:
            syms.pop(0)
        while syms and syms[-1] == blank:
            syms.pop()
        return "".join(syms)

    def cell(self, i, blank):
        off, syms = self.tape
        j = i - off
        return syms[j] if 0 <= j < len(syms) else blank


@dataclass(frozen=True)
class RunResult:
    status: str  # accepted | rejected | timeout
    trace: tuple  # configurations of a witness path, trace[t] after t steps
    steps: int

    @property
    def accepted(self) -> bool:
        return self.status == "accepted"


def _successors(m: TMSpec, c: Config, width: int | None):
    off, syms = c.tape
    s = c.cell(c.head, m.blank)
    outs = m.step_options(c.state, s)
    res = []
    for q2, s2, mv in outs:
        j = c.head - off
        if 0 <= j < len(syms):
            new = syms[:j] + (s2,) + syms[j + 1:]
            noff = off
        elif j < 0:
            new = (s2,) + (m.blank,) * (-j - 1) + syms
            noff = c.head
        else:
            new = syms + (m.blank,) * (j - len(syms)) + (s2,)
            noff = off
        h = c.head + {"L": -1, "R": 1, "S": 0}[mv]
        if width is not None:
            h = min(max(h, 0), width - 1)
        res.append(Config((noff, new), h, q2))
    return res


def initial_config(m: TMSpec, input: str = "", tape_width: int | None = None) -> Config:
    syms = tuple(input)
    if tape_width is None:
        return Config((0, syms), 0, m.start)
    if tape_width < 1:
        raise ValueError("tape_width must be >= 1")
    h = tape_width // 2
    if h + len(syms) > tape_width:
        raise ValueError(f"input of length {len(syms)} does not fit right of the centre")
    tape = (m.blank,) * h + syms + (m.blank,) * (tape_width - h - len(syms))
    return Config((0, tape), h, m.start)


def run_reference(m: TMSpec, input: str = "", max_steps: int = 64,
                  tape_width: int | None = None) -> RunResult:
    """Exact simulation; nondeterministic machines explore every path.

    With ``tape_width`` the tape is bounded (head starts at the centre, input
    written from the head rightwards, moves clamped at the ends); otherwise
    the tape is unbounded and the head starts on the first input symbol.
    """
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    for ch in input:
        if ch not in m.alphabet:
            raise ConfigError(f"input symbol {ch!r} not in the alphabet")
    start = initial_config(m, input, tape_width)
    if m.deterministic:
        trace = [start]
        c = start
        for step in range(1, max_steps + 1):
            nxt = _successors(m, c, tape_width)
            if not nxt:
                status = "accepted" if c.state == m.accept else "rejected"
                return RunResult(status, tuple(trace), step - 1)
            c = nxt[0]
            trace.append(c)
        status = {m.accept: "accepted", m.reject: "rejected"}.get(c.state, "timeout")
        return RunResult(status, tuple(trace), max_steps)
    # breadth-first over the configuration graph; parents give a witness path
    parent = {start: None}
    depth = {start: 0}
    frontier = deque([start])
    dead_ends = []
    open_paths = False
    while frontier:
        c = frontier.popleft()
        if c.state == m.accept:
            return RunResult("accepted", _path(parent, c), depth[c])
        nxt = _successors(m, c, tape_width)
        if not nxt:
            dead_ends.append(c)
            continue
        if depth[c] == max_steps:
            open_paths = True
            continue
        for n in nxt:
            if n not in parent:
                parent[n] = c
                depth[n] = depth[c] + 1
                frontier.append(n)
    canonical = run_deterministic_path(m, input, max_steps, tape_width)
    return RunResult("timeout" if open_paths else "rejected", canonical, len(canonical) - 1)


def _path(parent, c):
    out = []
    while c is not None:
        out.append(c)
        c = parent[c]
    return tuple(reversed(out))


def run_deterministic_path(m: TMSpec, input="", steps=64, tape_width=None) -> tuple:
    """The canonical (first-choice) path, copying forward once halted or stuck."""
    c = initial_config(m, input, tape_width)
    trace = [c]
    for _ in range(steps):
        nxt = _successors(m, c, tape_width)
        c = nxt[0] if nxt else c
        trace.append(c)
    return tuple(trace)


def square_paths(m: TMSpec, n: int, limit: int = 10 ** 5) -> list[tuple]:
    """All distinct 2^n+1-configuration histories inside an n-square (bounded)."""
    width = 2 ** n + 1
    rows = 2 ** n + 1
    paths = [(initial_config(m, "", width),)]
    for _ in range(rows - 1):
        new = []
        for p in paths:
            succ = _successors(m, p[-1], width) or [p[-1]]
            seen = set()
            for s in succ:
                if s not in seen:
                    seen.add(s)
                    new.append(p + (s,))
        paths = new
        if len(paths) > limit:
            raise ValueError(f"more than {limit} computation paths")
    return paths


# -- tokens ------------------------------------------------------------------------


def _check_name(kind, name):
    if name in RESERVED_TOKENS:
        raise CompileError(f"{kind} {name!r} collides with a reserved TM token")
    if not name or _BAD_CHARS.search(name):
        raise CompileError(f"{kind} {name!r} contains a reserved character")


class SquareTrace:
    """Canonical history inside an n-square, exposed as edge tokens."""

    def __init__(self, cm: "CompiledMachine", n: int, configs: Sequence[Config] | None = None):
        self.cm, self.n = cm, n
        self.width = 2 ** n + 1
        if configs is None:
            configs = run_deterministic_path(cm.spec, "", 2 ** n, self.width)
        if len(configs) != self.width:
            raise ValueError(f"an {n}-square holds {self.width} configurations, got {len(configs)}")
        self.configs = tuple(configs)

    def value(self, t: int, i: int):
        c = self.configs[t]
        return (c.cell(i, self.cm.spec.blank), c.state if c.head == i else None)

    def cell_token(self, f: int, i: int) -> str:
        """Token on the south edge of free row f (f == 2^n + 1 is the absorbed top)."""
        if f >= self.width:
            return "x"
        return self.cm.token(*self.value(f, i))

    def move_token(self, t: int, g: int) -> str:
        """Token between free columns g-1 and g in free row t."""
        if g >= self.width:
            return "|"
        if t >= self.width - 1:
            return "-"
        a, b = self.configs[t], self.configs[t + 1]
        if b.head == a.head + 1 and g == b.head:
            return ">" + b.state
        if b.head == a.head - 1 and g == a.head:
            return "<" + b.state
        return "-"


class CompiledMachine:
    """TM-layer tokens and per-role fragment tables for a machine."""

    def __init__(self, spec: TMSpec, n0: int = 1):
        for s in spec.alphabet:
            _check_name("symbol", s)
        for q in spec.states:
            _check_name("state", q)
        self.spec = spec
        self.n0 = n0
        self.values = [(s, q) for s in spec.alphabet for q in (None,) + spec.states]
        self.moves = [d + q for d in "><" for q in spec.states]
        self._traces: dict = {}

    def token(self, s, q) -> str:
        m = self.spec
        base = "s0" if s == m.blank else s
        if q is None:
            return base
        if s == m.blank and q == m.start:
            return "s0q0"
        return f"{base}@{q}"

    @property
    def tm_layer_alphabet(self) -> frozenset:
        return frozenset([self.token(*v) for v in self.values] + self.moves + sorted(RESERVED_TOKENS))

    def square_trace(self, n: int) -> SquareTrace:
        if n not in self._traces:
            self._traces[n] = SquareTrace(self, n)
        return self._traces[n]

    def fragments(self, role: str) -> list[tuple]:
        """Allowed (north, east, south, west) TM tokens for a structural role."""
        return list(_fragments(self, role))

    @property
    def tile_fragments(self) -> dict:
        roles = ["none", "colT", "rowT", "emit", "emitq", "absorbT", "absorbL", "absorbR"]
        roles += ["free" + (":" + f if f else "") for f in
                  ("", "L", "R", "T", "LR", "LT", "RT", "LRT")]
        return {r: self.fragments(r) for r in roles}


def _fragments(cm: CompiledMachine, role: str):
    m = cm.spec
    tok = cm.token
    if role == "none":
        return [("-", "-", "-", "-")]
    if role == "colT":
        return [(tok(*v), "-", tok(*v), "-") for v in cm.values]
    if role == "rowT":
        return [("-", mv, "-", mv) for mv in ["-"] + cm.moves]
    if role == "emit":
        return [(tok(m.blank, None), "-", "-", "-")]
    if role == "emitq":
        return [(tok(m.blank, m.start), "-", "-", "-")]
    if role == "absorbT":
        return [("-", "-", "x", "-")]
    if role == "absorbL":
        return [("-", "|", "-", "-")]
    if role == "absorbR":
        return [("-", "-", "-", "|")]
    if not role.startswith("free"):
        raise CompileError(f"unknown structural role {role!r}")
    flags = role.partition(":")[2]
    lb, rb, top = "L" in flags, "R" in flags, "T" in flags
    w_idle, e_idle = ("|" if lb else "-"), ("|" if rb else "-")
    out = []
    for s, q in cm.values:
        south = tok(s, q)
        if top:
            out.append(("x", e_idle, south, w_idle))
            continue
        if q is None:
            out.append((south, e_idle, south, w_idle))
            for q2 in m.states:
                if not lb:
                    out.append((tok(s, q2), e_idle, south, ">" + q2))
                if not rb:
                    out.append((tok(s, q2), "<" + q2, south, w_idle))
            continue
        opts = m.step_options(q, s)
        if not opts:
            out.append((south, e_idle, south, w_idle))
        for q2, s2, mv in opts:
            if mv == "S" or (mv == "R" and rb) or (mv == "L" and lb):
                out.append((tok(s2, q2), e_idle, south, w_idle))
            elif mv == "R":
                out.append((tok(s2, None), ">" + q2, south, w_idle))
            else:
                out.append((tok(s2, None), e_idle, south, "<" + q2))
    return list(dict.fromkeys(out))


def compile(m: TMSpec, n0: int | None = None) -> CompiledMachine:
    """Compile ``m`` into TM-layer fragment tables (raises CompileError on token clashes)."""
    return CompiledMachine(m, n0 if n0 is not None else int(m.meta.get("n0", 1)))


# -- instance indexing ----------------------------------------------------------


@dataclass(frozen=True)
class InstanceIndexer:
    """n -> x_n, the (n - n0)-th binary string in length-then-lex order (empty first)."""

    n0: int = 2

    def string(self, n: int) -> str:
        if n < self.n0:
            raise ValueError(f"level {n} is below n0={self.n0}: unsupported")
        return bin(n - self.n0 + 1)[3:]

    def level(self, x: str) -> int:
        if set(x) - {"0", "1"}:
            raise ValueError("instances are binary strings")
        return int("1" + x, 2) - 1 + self.n0

    def strings(self, n_max: int) -> list[str]:
        return [self.string(n) for n in range(self.n0, n_max + 1)]


# -- built-in and toy machines ----------------------------------------------------


def _spec(name, states, alphabet, trans, start="q0", accept="acc", reject="rej", blank="_", **kw):
    t: dict = {}
    for (q, s), outs in trans:
        t.setdefault((q, s), []).extend(outs)
    return TMSpec(states, alphabet, blank, start, accept, reject, t, name=name, **kw)


def builtin_counter() -> TMSpec:
    """Binary counter: the number grows leftwards with its least significant bit at
    the start cell.  ``inc`` performs the carry, ``ret`` walks back to the cell
    right of the number and steps onto the LSB again."""
    tr = [(("inc", "1"), [("inc", "0", "L")]),
          (("inc", "0"), [("ret", "1", "R")]),
          (("inc", "_"), [("ret", "1", "R")]),
          (("ret", "0"), [("ret", "0", "R")]),
          (("ret", "1"), [("ret", "1", "R")]),
          (("ret", "_"), [("inc", "_", "L")])]
    # the start cell holds the LSB; entering `inc` directly from q0
    tr.append((("q0", "_"), [("ret", "1", "R")]))
    return _spec("counter", ("q0", "inc", "ret", "acc", "rej"), ("_", "0", "1"), tr)


def counter_increments(trace: Sequence[Config]) -> list[int]:
    """Trace indices right after each increment completes (a 1 written)."""
    return [t for t in range(1, len(trace)) if trace[t].state == "ret" and trace[t - 1].state in ("q0", "inc")]


def counter_tape_after(increments: int, tape_width: int | None = None) -> str:
    m = builtin_counter()
    if increments == 0:
        return ""
    steps = 8 * (increments + 2) * max(1, increments.bit_length() + 2)
    tr = run_deterministic_path(m, "", steps, tape_width)
    done = counter_increments(tr)
    return tr[done[increments - 1]].symbols(m.blank)


def always_accept() -> TMSpec:
    return _spec("accept", ("q0", "acc", "rej"), ("_", "0", "1"),
                 [((("q0", s)), [("acc", s, "S")]) for s in ("_", "0", "1")])


def always_reject() -> TMSpec:
    return _spec("reject", ("q0", "acc", "rej"), ("_", "0", "1"),
                 [((("q0", s)), [("rej", s, "S")]) for s in ("_", "0", "1")])


def parity_machine() -> TMSpec:
    """Accepts iff the input has an even number of 1s."""
    tr = []
    for q, other in (("q0", "odd"), ("odd", "q0")):
        tr.append(((q, "0"), [(q, "0", "R")]))
        tr.append(((q, "1"), [(other, "1", "R")]))
    tr.append((("q0", "_"), [("acc", "_", "S")]))
    tr.append((("odd", "_"), [("rej", "_", "S")]))
    return _spec("parity", ("q0", "odd", "acc", "rej"), ("_", "0", "1"), tr)


def branching_machine() -> TMSpec:
    """Guesses a bit, writes it, and accepts iff it guessed 1."""
    tr = [(("q0", s), [("w0", "0", "R"), ("w1", "1", "R")]) for s in ("_", "0", "1")]
    tr += [(("w0", s), [("rej", s, "S")]) for s in ("_", "0", "1")]
    tr += [(("w1", s), [("acc", s, "S")]) for s in ("_", "0", "1")]
    return _spec("branch", ("q0", "w0", "w1", "acc", "rej"), ("_", "0", "1"), tr)


TOY_MACHINES = {"accept": always_accept, "reject": always_reject, "parity": parity_machine,
                "branch": branching_machine, "counter": builtin_counter}


# -- pipeline -------------------------------------------------------------------

_PIPE_SYMS = ("#C", "#A", "#q", "#p", "#d", "#E", "#F")


def compose_pipeline(m: TMSpec, indexer: InstanceIndexer) -> TMSpec:
    """One machine that, started on a blank bounded tape of width 2^n + 1 with the
    head at the centre, computes x_n and then runs ``m`` on it.

    Stages: mark both tape ends (a write-then-move that reads back its own mark
    means the move was clamped); halve the right half in unary until one cell
    is left, counting passes (n - 1) in binary on the left half; subtract
    n0 - 2; erase the work area and the leading 1 of the counter, leaving
    x_n = bin(n - n0 + 1) without its leading 1 ending just left of the centre;
    hand over to ``m`` with the head on the first bit.  Needs n0 >= 2 and is
    only meaningful with a bounded tape.
    """
    if indexer.n0 < 2:
        raise CompileError("the pipeline needs n0 >= 2 (two cells left of the centre)")
    if not {"0", "1"} <= set(m.alphabet):
        raise CompileError("the main machine must read the binary alphabet {0, 1}")
    clash = set(m.alphabet) & set(_PIPE_SYMS)
    if clash:
        raise CompileError(f"stage alphabets collide on {sorted(clash)}")
    B = m.blank
    C, A, Q, P, D, E, F = _PIPE_SYMS
    tr: list = []

    def add(q, s, q2, s2, mv):
        tr.append(((q, s), [(q2, s2, mv)]))

    add("q0", B, "markL", C, "L")
    add("markL", B, "markL", Q, "L")
    add("markL", Q, "toC0", A, "R")  # clamped: leftmost cell
    add("toC0", Q, "toC0", Q, "R")
    add("toC0", C, "markR", C, "R")
    add("markR", B, "markR", P, "R")
    add("markR", P, "back0", E, "L")  # clamped: rightmost cell
    add("back0", P, "back0", P, "L")
    add("back0", C, "sw0", C, "R")
    # sweeps: sw0 none alive seen, sw1 one seen, sw2 even >= 2, sw3 odd >= 3
    for q in ("sw0", "sw1", "sw2", "sw3"):
        add(q, D, q, D, "R")
    add("sw0", P, "sw1", P, "R")
    add("sw0", E, "done", E, "L")
    add("sw1", P, "sw2", D, "R")
    add("sw1", E, "backI", F, "L")
    add("sw1", F, "done", F, "L")
    add("sw2", P, "sw3", P, "R")
    add("sw2", F, "backI", F, "L")
    add("sw3", P, "sw2", D, "R")
    add("sw3", E, "backI", F, "L")
    for s in (P, D):
        add("backI", s, "backI", s, "L")
        add("done", s, "done", s, "L")
    add("backI", C, "inc", C, "L")
    add("inc", "1", "inc", "0", "L")
    for s in ("0", Q):
        add("inc", s, "ret", "1", "R")
    for s in ("0", "1"):
        add("ret", s, "ret", s, "R")
    add("ret", C, "sw0", C, "R")
    ops = indexer.n0 - 2
    if ops == 0:
        add("done", C, "clean", C, "R")
    else:
        add("done", C, "dec0", C, "L")
    for i in range(ops):
        add(f"dec{i}", "1", f"dret{i}", "0", "R")
        for s in ("0", Q):
            add(f"dec{i}", s, f"dec{i}", "1", "L")
        for s in ("0", "1"):
            add(f"dret{i}", s, f"dret{i}", s, "R")
        if i + 1 < ops:
            add(f"dret{i}", C, f"dec{i + 1}", C, "L")
        else:
            add(f"dret{i}", C, "clean", C, "R")
    for s in (P, D):
        add("clean", s, "clean", B, "R")
    for s in (E, F):
        add("clean", s, "cback", B, "L")
    add("cback", B, "cback", B, "L")
    add("cback", C, "goA", B, "L")
    for s in ("0", "1", Q):
        add("goA", s, "goA", s, "L")
    add("goA", A, "strip", B, "R")
    for s in (Q, "0"):
        add("strip", s, "strip", B, "R")
    mq = lambda q: "m." + q
    add("strip", "1", mq(m.start), B, "R")
    for (q, s), outs in m.transitions.items():
        tr.append(((mq(q), s), [(mq(q2), s2, mv) for q2, s2, mv in outs]))
    own = ["q0", "markL", "toC0", "markR", "back0", "sw0", "sw1", "sw2", "sw3", "backI",
           "done", "inc", "ret", "clean", "cback", "goA", "strip"]
    own += [f"{p}{i}" for i in range(ops) for p in ("dec", "dret")]
    states = tuple(own) + tuple(mq(q) for q in m.states)
    alphabet = tuple(m.alphabet) + _PIPE_SYMS
    t: dict = {}
    for k, outs in tr:
        t.setdefault(k, []).extend(outs)
    return TMSpec(states, alphabet, B, "q0", mq(m.accept), mq(m.reject), t,
                  max_branching=max(2, m.max_branching), name=f"pipeline-{m.name}",
                  meta={"n0": indexer.n0, "main": m.name})


def pipeline_steps_bound(n: int, main_steps: int) -> int:
    """Generous step budget for the pipeline at level n plus ``main_steps`` for m."""
    w = 2 ** n + 1
    return 4 * w * (n + 4) + 8 * w + main_steps


def run_pipeline(pipe: TMSpec, n: int, main_steps: int = 256) -> RunResult:
    return run_reference(pipe, "", pipeline_steps_bound(n, main_steps), tape_width=2 ** n + 1)


def measure_n0(m: TMSpec, indexer: InstanceIndexer, n_max: int = 7, main_steps: int = 256) -> int | None:
    """Smallest level from which the pipeline's verdict agrees with m(x_n) up to n_max."""
    pipe = compose_pipeline(m, indexer)
    good = None
    for n in range(n_max, indexer.n0 - 1, -1):
        x = indexer.string(n)
        want = run_reference(m, x, main_steps).status
        if run_pipeline(pipe, n, main_steps).status != want:
            break
        good = n
    return good
