"""Networks of communicating automata and their reachability graphs.

Each automaton is a Moore-style machine: a local state emits a set of
signals, and arcs are guarded by Boolean expressions over the signals
generated in the current global state.  All automata step together; an
automaton with an enabled arc must take one, an automaton with none
stays where it is.
"""
from __future__ import annotations

import itertools
import re
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Optional

__all__ = [
    "ModelError", "StateLimitExceeded",
    "GConst", "GSig", "GNot", "GAnd", "GOr", "Guard",
    "Arc", "Automaton", "AutomataNetwork", "GlobalState", "RGArc",
    "ReachabilityGraph", "parse_model", "load_model", "generated_signals",
    "build_rg", "listeners", "guard_signals", "DEFAULT_STATE_CAP",
]

DEFAULT_STATE_CAP = 1_000_000


class ModelError(ValueError):
    """Raised for malformed or inconsistent model text."""

    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.message = message
        self.line = line
        self.col = col
        where = f"line {line}, column {col}: " if line else ""
        super().__init__(where + message)


class StateLimitExceeded(RuntimeError):
    def __init__(self, cap: int):
        self.cap = cap
        super().__init__(f"state-count limit of {cap} exceeded while building the reachability graph")


# --- guards ---------------------------------------------------------------

@dataclass(frozen=True)
class GConst:
    value: bool

    def __str__(self):
        return "true" if self.value else "false"


@dataclass(frozen=True)
class GSig:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class GNot:
    arg: "Guard"

    def __str__(self):
        return "!" + _gwrap(self.arg, 3)


@dataclass(frozen=True)
class GAnd:
    left: "Guard"
    right: "Guard"

    def __str__(self):
        return f"{_gwrap(self.left, 2)} * {_gwrap(self.right, 3)}"


@dataclass(frozen=True)
class GOr:
    left: "Guard"
    right: "Guard"

    def __str__(self):
        return f"{_gwrap(self.left, 1)} + {_gwrap(self.right, 2)}"


Guard = GConst | GSig | GNot | GAnd | GOr


def _glevel(g: Guard) -> int:
    if isinstance(g, GOr):
        return 1
    if isinstance(g, GAnd):
        return 2
    return 3


def _gwrap(g: Guard, need: int) -> str:
    return str(g) if _glevel(g) >= need else f"({g})"


def guard_signals(g: Guard) -> set[str]:
    """Signal names mentioned anywhere in a guard."""
    if isinstance(g, GSig):
        return {g.name}
    if isinstance(g, GNot):
        return guard_signals(g.arg)
    if isinstance(g, (GAnd, GOr)):
        return guard_signals(g.left) | guard_signals(g.right)
    return set()


def _compile_guard(g: Guard) -> Callable[[frozenset], bool]:
    if isinstance(g, GConst):
        v = g.value
        return lambda sigs: v
    if isinstance(g, GSig):
        name = g.name
        return lambda sigs: name in sigs
    if isinstance(g, GNot):
        f = _compile_guard(g.arg)
        return lambda sigs: not f(sigs)
    lf, rf = _compile_guard(g.left), _compile_guard(g.right)
    if isinstance(g, GAnd):
        return lambda sigs: lf(sigs) and rf(sigs)
    return lambda sigs: lf(sigs) or rf(sigs)


# --- network --------------------------------------------------------------

@dataclass(frozen=True)
class Arc:
    src: str
    dst: str
    guard: Guard
    holds: Callable[[frozenset], bool] = field(compare=False, repr=False, default=None)

    def __post_init__(self):
        if self.holds is None:
            object.__setattr__(self, "holds", _compile_guard(self.guard))


@dataclass
class Automaton:
    name: str
    states: tuple[str, ...]
    initial: str
    emits: dict[str, tuple[str, ...]]
    arcs: tuple[Arc, ...]

    def __post_init__(self):
        self._out: dict[str, tuple[Arc, ...]] = {
            p: tuple(a for a in self.arcs if a.src == p) for p in self.states
        }

    def outgoing(self, local: str) -> tuple[Arc, ...]:
        return self._out[local]


@dataclass
class AutomataNetwork:
    automata: tuple[Automaton, ...]

    def __post_init__(self):
        self._index = {a.name: i for i, a in enumerate(self.automata)}
        sigs = []
        for a in self.automata:
            for p in a.states:
                for x in a.emits.get(p, ()):
                    if x not in sigs:
                        sigs.append(x)
        self.signals: tuple[str, ...] = tuple(sigs)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.automata)

    def index(self, name: str) -> int:
        return self._index[name]

    def automaton(self, name: str) -> Automaton:
        return self.automata[self._index[name]]

    def has_local(self, automaton: str, local: str) -> bool:
        return automaton in self._index and local in self.automaton(automaton).states


@dataclass(frozen=True)
class GlobalState:
    id: int
    components: tuple[str, ...]

    def __str__(self):
        return f"s{self.id}"


@dataclass(frozen=True)
class RGArc:
    src: int
    dst: int
    movers: frozenset[str]


@dataclass
class ReachabilityGraph:
    net: AutomataNetwork
    states: list[GlobalState]
    arcs: list[RGArc]
    initial: int = 0

    def __post_init__(self):
        n = len(self.states)
        succ: list[list[int]] = [[] for _ in range(n)]
        pred: list[list[int]] = [[] for _ in range(n)]
        self.movers: dict[tuple[int, int], frozenset[str]] = {}
        for a in self.arcs:
            succ[a.src].append(a.dst)
            pred[a.dst].append(a.src)
            self.movers[a.src, a.dst] = a.movers
        self.succ: list[tuple[int, ...]] = [tuple(sorted(x)) for x in succ]
        self.pred: list[tuple[int, ...]] = [tuple(sorted(x)) for x in pred]
        self.generated: list[frozenset[str]] = [
            generated_signals(self.net, s) for s in self.states
        ]
        self._by_components = {s.components: s.id for s in self.states}

    def __len__(self):
        return len(self.states)

    def state_of(self, components: tuple[str, ...]) -> Optional[int]:
        return self._by_components.get(tuple(components))

    def is_arc(self, src: int, dst: int) -> bool:
        return (src, dst) in self.movers

    def successors_moving(self, s: int, automaton: str) -> tuple[int, ...]:
        """Successors of ``s`` reached by an arc on which ``automaton`` moved."""
        return tuple(t for t in self.succ[s] if automaton in self.movers[s, t])

    def future(self, s: int) -> set[int]:
        """States reachable from ``s`` by at least one arc."""
        seen: set[int] = set()
        todo = deque(self.succ[s])
        while todo:
            t = todo.popleft()
            if t in seen:
                continue
            seen.add(t)
            todo.extend(u for u in self.succ[t] if u not in seen)
        return seen

    def matching(self, automaton: str, local: str) -> list[int]:
        """Ids of states whose component ``automaton`` is in ``local``."""
        i = self.net.index(automaton)
        return [s.id for s in self.states if s.components[i] == local]


def generated_signals(net: AutomataNetwork, s: GlobalState | tuple[str, ...]) -> frozenset[str]:
    components = s.components if isinstance(s, GlobalState) else s
    out: set[str] = set()
    for a, p in zip(net.automata, components):
        out.update(a.emits.get(p, ()))
    return frozenset(out)


def listeners(net: AutomataNetwork, s: GlobalState | tuple[str, ...], x: str) -> list[str]:
    """Automata whose current local state has an outgoing arc mentioning ``x``.

    Returned in declaration order.
    """
    components = s.components if isinstance(s, GlobalState) else s
    return [
        a.name for a, p in zip(net.automata, components)
        if any(x in guard_signals(arc.guard) for arc in a.outgoing(p))
    ]


def build_rg(net: AutomataNetwork, cap: int = DEFAULT_STATE_CAP) -> ReachabilityGraph:
    """Breadth-first synchronous product from the product of initial states."""
    init = tuple(a.initial for a in net.automata)
    index: dict[tuple[str, ...], int] = {init: 0}
    order: list[tuple[str, ...]] = [init]
    arcs: list[RGArc] = []
    choice_cache: dict[tuple[int, str, frozenset], list[tuple[str, bool]]] = {}

    def choices(i: int, a: Automaton, p: str, sigs: frozenset) -> list[tuple[str, bool]]:
        key = (i, p, sigs)
        got = choice_cache.get(key)
        if got is None:
            targets: list[str] = []
            for arc in a.outgoing(p):
                if arc.holds(sigs) and arc.dst not in targets:
                    targets.append(arc.dst)
            got = [(t, True) for t in targets] or [(p, False)]
            choice_cache[key] = got
        return got

    k = 0
    while k < len(order):
        comps = order[k]
        sigs = generated_signals(net, comps)
        per_aut = [choices(i, a, p, sigs) for i, (a, p) in enumerate(zip(net.automata, comps))]
        found: dict[int, set[str]] = {}
        for combo in itertools.product(*per_aut):
            dst = tuple(t for t, _ in combo)
            j = index.get(dst)
            if j is None:
                j = len(order)
                if j >= cap:
                    raise StateLimitExceeded(cap)
                index[dst] = j
                order.append(dst)
            movers = found.setdefault(j, set())
            movers.update(a.name for a, (_, fired) in zip(net.automata, combo) if fired)
        for j in sorted(found):
            arcs.append(RGArc(k, j, frozenset(found[j])))
        k += 1

    states = [GlobalState(i, c) for i, c in enumerate(order)]
    return ReachabilityGraph(net, states, arcs, 0)


# --- model text -----------------------------------------------------------

_TOKEN = re.compile(r"\s+|#[^\n]*|(?P<arrow>->)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<punct>[{};,!*+()])")
_KEYWORDS = {"automaton", "state", "emits", "init", "arc", "when", "true", "false"}


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ModelError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        if m.lastgroup:
            toks.append(_Tok(m.lastgroup, m.group(), line, pos - line_start + 1))
        chunk = m.group()
        nl = chunk.count("\n")
        if nl:
            line += nl
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class _ModelParser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def error(self, msg: str, tok: Optional[_Tok] = None):
        tok = tok or self.tok
        raise ModelError(msg, tok.line, tok.col)

    def take(self, text: Optional[str] = None, kind: Optional[str] = None) -> _Tok:
        t = self.tok
        if (text is not None and t.text != text) or (kind is not None and t.kind != kind):
            want = repr(text) if text else kind
            self.error(f"expected {want}, found {t.text or 'end of input'!r}")
        self.i += 1
        return t

    def ident(self) -> _Tok:
        t = self.take(kind="ident")
        if t.text in _KEYWORDS:
            self.error(f"keyword {t.text!r} used as identifier", t)
        return t

    def network(self):
        raw = []
        while self.tok.kind != "eof":
            raw.append(self.automaton())
        if not raw:
            self.error("no automata declared")
        return raw

    def automaton(self):
        self.take("automaton")
        name = self.ident()
        self.take("{")
        states: list[tuple[_Tok, list[str]]] = []
        inits: list[_Tok] = []
        arcs: list[tuple[_Tok, _Tok, Guard]] = []
        while self.tok.text != "}":
            if self.tok.text == "state":
                self.i += 1
                st = self.ident()
                emits: list[str] = []
                if self.tok.text == "emits":
                    self.i += 1
                    emits.append(self.ident().text)
                    while self.tok.text == ",":
                        self.i += 1
                        emits.append(self.ident().text)
                states.append((st, emits))
            elif self.tok.text == "init":
                self.i += 1
                inits.append(self.ident())
            elif self.tok.text == "arc":
                self.i += 1
                src = self.ident()
                self.take(kind="arrow")
                dst = self.ident()
                self.take("when")
                arcs.append((src, dst, self.guard()))
            else:
                self.error(f"expected declaration, found {self.tok.text or 'end of input'!r}")
            self.take(";")
        self.take("}")
        return name, states, inits, arcs

    def guard(self) -> Guard:
        g = self.conj()
        while self.tok.text == "+":
            self.i += 1
            g = GOr(g, self.conj())
        return g

    def conj(self) -> Guard:
        g = self.unary()
        while self.tok.text == "*":
            self.i += 1
            g = GAnd(g, self.unary())
        return g

    def unary(self) -> Guard:
        t = self.tok
        if t.text == "!":
            self.i += 1
            return GNot(self.unary())
        if t.text == "(":
            self.i += 1
            g = self.guard()
            self.take(")")
            return g
        if t.text in ("true", "false"):
            self.i += 1
            return GConst(t.text == "true")
        tok = self.ident()
        return _SigRef(tok.text, tok)


@dataclass(frozen=True)
class _SigRef(GSig):
    tok: _Tok = field(compare=False, repr=False, default=None)


def _strip_refs(g: Guard, declared: set[str]) -> Guard:
    if isinstance(g, _SigRef):
        if g.name not in declared:
            raise ModelError(f"undeclared signal {g.name!r}", g.tok.line, g.tok.col)
        return GSig(g.name)
    if isinstance(g, GNot):
        return GNot(_strip_refs(g.arg, declared))
    if isinstance(g, GAnd):
        return GAnd(_strip_refs(g.left, declared), _strip_refs(g.right, declared))
    if isinstance(g, GOr):
        return GOr(_strip_refs(g.left, declared), _strip_refs(g.right, declared))
    return g


def parse_model(text: str) -> AutomataNetwork:
    raw = _ModelParser(text).network()
    declared = {x for _, states, _, _ in raw for _, emits in states for x in emits}
    seen_names: set[str] = set()
    automata = []
    for name, states, inits, arcs in raw:
        if name.text in seen_names:
            raise ModelError(f"duplicate automaton {name.text!r}", name.line, name.col)
        seen_names.add(name.text)
        local: list[str] = []
        emits: dict[str, tuple[str, ...]] = {}
        for st, em in states:
            if st.text in local:
                raise ModelError(f"duplicate local state {st.text!r} in automaton {name.text!r}", st.line, st.col)
            local.append(st.text)
            emits[st.text] = tuple(dict.fromkeys(em))
        if not inits:
            raise ModelError(f"missing initial state in automaton {name.text!r}", name.line, name.col)
        if len(inits) > 1:
            raise ModelError(f"duplicate init in automaton {name.text!r}", inits[1].line, inits[1].col)
        if inits[0].text not in local:
            raise ModelError(f"unknown local state {inits[0].text!r}", inits[0].line, inits[0].col)
        arc_objs = []
        for src, dst, g in arcs:
            for t in (src, dst):
                if t.text not in local:
                    raise ModelError(f"unknown local state {t.text!r}", t.line, t.col)
            arc_objs.append(Arc(src.text, dst.text, _strip_refs(g, declared)))
        automata.append(Automaton(name.text, tuple(local), inits[0].text, emits, tuple(arc_objs)))
    return AutomataNetwork(tuple(automata))


def load_model(path) -> AutomataNetwork:
    with open(path, encoding="utf-8") as fh:
        return parse_model(fh.read())


def format_model(net: AutomataNetwork) -> str:
    """Model text that parses back to ``net``."""
    lines = []
    for a in net.automata:
        lines.append(f"automaton {a.name} {{")
        for p in a.states:
            em = a.emits.get(p, ())
            lines.append(f"  state {p}" + (f" emits {', '.join(em)}" if em else "") + ";")
        lines.append(f"  init {a.initial};")
        for arc in a.arcs:
            lines.append(f"  arc {arc.src} -> {arc.dst} when {arc.guard};")
        lines.append("}")
    return "\n".join(lines) + "\n"


def iter_components(net: AutomataNetwork) -> Iterator[tuple[str, ...]]:
    """Every tuple of local states, reachable or not."""
    return itertools.product(*(a.states for a in net.automata))
