"""QsCTL formulas: abstract syntax, parser, printer and node numbering.

All path quantifiers are implicitly universal, so ``G p`` means AG p.
Surface syntax (loosest binding first)::

    A s in {a.p, ...}; f     E s in {...}; f     a.p: f     s: f
    f => g    f <=> g        (right-associative)
    f U g                    (weak until, right-associative)
    f + g
    f * g
    !f   N f   N[a] f   F f   G f
    true  false  sig  a.p  in a.p  in s  (f)

Nodes are numbered in pre-order from 1; the numbers key everything
downstream (critical-tree entries, views, XML).
"""
from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

from .csm import AutomataNetwork

__all__ = [
    "FormulaError", "Designator", "Const", "Sig", "InState", "StateVar",
    "Not", "And", "Or", "Implies", "Iff", "Next", "NextIn", "Finally",
    "Globally", "WeakUntil", "AtState", "ForAll", "Exists", "Node",
    "Formula", "parse_formula", "free_atoms", "reduction_atoms",
    "children", "lexeme", "to_text",
]


class FormulaError(ValueError):
    def __init__(self, message: str, pos: Optional[int] = None):
        self.message = message
        self.pos = pos
        super().__init__(message if pos is None else f"column {pos + 1}: {message}")


@dataclass(frozen=True)
class Designator:
    automaton: str
    local: str

    def __str__(self):
        return f"{self.automaton}.{self.local}"


_nid = dict(default=0, compare=False, repr=False)


@dataclass(frozen=True)
class Const:
    value: bool
    id: int = field(**_nid)


@dataclass(frozen=True)
class Sig:
    name: str
    id: int = field(**_nid)


@dataclass(frozen=True)
class InState:
    where: Designator
    id: int = field(**_nid)


@dataclass(frozen=True)
class StateVar:
    var: str
    id: int = field(**_nid)


@dataclass(frozen=True)
class Not:
    arg: "Node"
    id: int = field(**_nid)


@dataclass(frozen=True)
class And:
    left: "Node"
    right: "Node"
    id: int = field(**_nid)


@dataclass(frozen=True)
class Or:
    left: "Node"
    right: "Node"
    id: int = field(**_nid)


@dataclass(frozen=True)
class Implies:
    left: "Node"
    right: "Node"
    id: int = field(**_nid)


@dataclass(frozen=True)
class Iff:
    left: "Node"
    right: "Node"
    id: int = field(**_nid)


@dataclass(frozen=True)
class Next:
    arg: "Node"
    id: int = field(**_nid)


@dataclass(frozen=True)
class NextIn:
    automaton: str
    arg: "Node"
    id: int = field(**_nid)


@dataclass(frozen=True)
class Finally:
    arg: "Node"
    id: int = field(**_nid)


@dataclass(frozen=True)
class Globally:
    arg: "Node"
    id: int = field(**_nid)


@dataclass(frozen=True)
class WeakUntil:
    left: "Node"
    right: "Node"
    id: int = field(**_nid)


@dataclass(frozen=True)
class AtState:
    """``target: arg``; target is a designator or a bound state variable."""
    target: Union[Designator, str]
    arg: "Node"
    id: int = field(**_nid)


@dataclass(frozen=True)
class ForAll:
    var: str
    states: tuple[Designator, ...]
    arg: "Node"
    id: int = field(**_nid)


@dataclass(frozen=True)
class Exists:
    var: str
    states: tuple[Designator, ...]
    arg: "Node"
    id: int = field(**_nid)


Node = Union[Const, Sig, InState, StateVar, Not, And, Or, Implies, Iff, Next,
             NextIn, Finally, Globally, WeakUntil, AtState, ForAll, Exists]

ATOMS = (Const, Sig, InState, StateVar)
BINARY = (And, Or, Implies, Iff, WeakUntil)
QUANTIFIERS = (ForAll, Exists)


def children(node: Node) -> tuple[Node, ...]:
    if isinstance(node, BINARY):
        return (node.left, node.right)
    if isinstance(node, ATOMS):
        return ()
    return (node.arg,)


def _rebuild(node: Node, kids: tuple[Node, ...], nid: int) -> Node:
    if isinstance(node, BINARY):
        return dataclasses.replace(node, left=kids[0], right=kids[1], id=nid)
    if isinstance(node, ATOMS):
        return dataclasses.replace(node, id=nid)
    return dataclasses.replace(node, arg=kids[0], id=nid)


def _number(node: Node, start: int = 1) -> tuple[Node, int]:
    nid = start
    nxt = start + 1
    kids = []
    for c in children(node):
        c2, nxt = _number(c, nxt)
        kids.append(c2)
    return _rebuild(node, tuple(kids), nid), nxt


def walk(node: Node) -> Iterator[Node]:
    """Pre-order traversal."""
    stack = [node]
    while stack:
        n = stack.pop()
        yield n
        stack.extend(reversed(children(n)))


# --- printing -------------------------------------------------------------

_BIN_LEX = {And: "*", Or: "+", Implies: "=>", Iff: "<=>", WeakUntil: "U"}
_UN_LEX = {Not: "!", Next: "N", Finally: "F", Globally: "G"}


def lexeme(node: Node) -> str:
    """Operator text for a single node, as shown in tree views."""
    if isinstance(node, Const):
        return "true" if node.value else "false"
    if isinstance(node, Sig):
        return node.name
    if isinstance(node, InState):
        return f"in {node.where}"
    if isinstance(node, StateVar):
        return f"in {node.var}"
    if isinstance(node, NextIn):
        return f"N[{node.automaton}]"
    if isinstance(node, AtState):
        return f"{node.target}:"
    if isinstance(node, QUANTIFIERS):
        q = "A" if isinstance(node, ForAll) else "E"
        return f"{q} {node.var} in {{{', '.join(map(str, node.states))}}};"
    if type(node) in _BIN_LEX:
        return _BIN_LEX[type(node)]
    return _UN_LEX[type(node)]


def _level(node: Node) -> int:
    if isinstance(node, (AtState, ForAll, Exists)):
        return 0
    if isinstance(node, (Implies, Iff)):
        return 1
    if isinstance(node, WeakUntil):
        return 2
    if isinstance(node, Or):
        return 3
    if isinstance(node, And):
        return 4
    if isinstance(node, ATOMS):
        return 6
    return 5


def to_text(node: Node) -> str:
    """Print a formula so that parsing it back gives the same tree."""

    def wrap(n: Node, need: int) -> str:
        s = to_text(n)
        return s if _level(n) >= need and _level(n) > 0 else f"({s})"

    if isinstance(node, ATOMS):
        return lexeme(node)
    if isinstance(node, (AtState, ForAll, Exists)):
        return f"{lexeme(node)} {to_text(node.arg)}"
    if isinstance(node, BINARY):
        lv = _level(node)
        if isinstance(node, (And, Or)):
            ln, rn = lv, lv + 1
        else:
            ln, rn = lv + 1, lv
        return f"{wrap(node.left, ln)} {lexeme(node)} {wrap(node.right, rn)}"
    sep = "" if isinstance(node, Not) else " "
    return f"{lexeme(node)}{sep}{wrap(node.arg, 5)}"


# --- parsing --------------------------------------------------------------

_TOK = re.compile(r"\s+|(?P<op><=>|=>|[!*+(){}\[\],;:.])|(?P<name>[A-Za-z_][A-Za-z0-9_]*)")
_RESERVED = {"N", "F", "G", "U", "in", "true", "false"}


class _Parser:
    def __init__(self, text: str):
        self.toks: list[tuple[str, int]] = []
        pos = 0
        while pos < len(text):
            m = _TOK.match(text, pos)
            if m is None:
                raise FormulaError(f"unexpected character {text[pos]!r}", pos)
            if m.lastgroup:
                self.toks.append((m.group(), pos))
            pos = m.end()
        self.toks.append(("", len(text)))
        self.i = 0
        self.bound: list[str] = []

    def peek(self, k: int = 0) -> str:
        j = min(self.i + k, len(self.toks) - 1)
        return self.toks[j][0]

    @property
    def pos(self) -> int:
        return self.toks[self.i][1]

    def take(self, want: Optional[str] = None) -> str:
        t = self.peek()
        if want is not None and t != want:
            raise FormulaError(f"expected {want!r}, found {t or 'end of input'!r}", self.pos)
        if not t:
            raise FormulaError("unexpected end of input", self.pos)
        self.i += 1
        return t

    def name(self) -> str:
        t = self.peek()
        if not _is_name(t):
            raise FormulaError(f"expected a name, found {t or 'end of input'!r}", self.pos)
        self.i += 1
        return t

    def designator(self) -> Designator:
        a = self.name()
        self.take(".")
        return Designator(a, self.name())

    def parse(self) -> Node:
        node = self.formula()
        if self.peek():
            raise FormulaError(f"unexpected {self.peek()!r}", self.pos)
        return node

    def formula(self) -> Node:
        return self.implication()

    def implication(self) -> Node:
        left = self.until()
        if self.peek() in ("=>", "<=>"):
            op = self.take()
            right = self.implication()
            return Implies(left, right) if op == "=>" else Iff(left, right)
        return left

    def until(self) -> Node:
        left = self.disj()
        if self.peek() == "U":
            self.take()
            return WeakUntil(left, self.until())
        return left

    def disj(self) -> Node:
        node = self.conj()
        while self.peek() == "+":
            self.take()
            node = Or(node, self.conj())
        return node

    def conj(self) -> Node:
        node = self.unary()
        while self.peek() == "*":
            self.take()
            node = And(node, self.unary())
        return node

    def unary(self) -> Node:
        t = self.peek()
        nxt = self.peek(1)
        if t == "!":
            self.take()
            return Not(self.unary())
        if t in ("N", "F", "G") and nxt not in (".", ":"):
            self.take()
            if t == "N" and nxt == "[":
                self.take("[")
                a = self.name()
                self.take("]")
                return NextIn(a, self.unary())
            arg = self.unary()
            return {"N": Next, "F": Finally, "G": Globally}[t](arg)
        return self.primary()

    def primary(self) -> Node:
        t = self.peek()
        pos = self.pos
        if t == "(":
            self.take()
            node = self.formula()
            self.take(")")
            return node
        if not _is_name(t):
            raise FormulaError(f"unexpected {t or 'end of input'!r}", pos)
        nxt = self.peek(1)
        if t in ("A", "E") and _is_name(nxt) and self.peek(2) == "in" and nxt not in _RESERVED:
            return self.quantifier()
        if nxt == ".":
            d = self.designator()
            if self.peek() == ":":
                self.take()
                return AtState(d, self.formula())
            return InState(d)
        if nxt == ":":
            self.take()
            self.take()
            if t not in self.bound:
                raise FormulaError(f"unbound state variable {t!r}", pos)
            return AtState(t, self.formula())
        if t in ("true", "false"):
            self.take()
            return Const(t == "true")
        if t == "in":
            self.take()
            if self.peek(1) == ".":
                return InState(self.designator())
            v = self.name()
            if v not in self.bound:
                raise FormulaError(f"unbound state variable {v!r}", pos)
            return StateVar(v)
        if t in _RESERVED:
            raise FormulaError(f"unexpected keyword {t!r}", pos)
        self.take()
        if t in self.bound:
            return StateVar(t)
        return Sig(t)

    def quantifier(self) -> Node:
        q = self.take()
        var = self.name()
        self.take("in")
        self.take("{")
        states = [self.designator()]
        while self.peek() == ",":
            self.take()
            states.append(self.designator())
        self.take("}")
        self.take(";")
        self.bound.append(var)
        try:
            body = self.formula()
        finally:
            self.bound.pop()
        cls = ForAll if q == "A" else Exists
        return cls(var, tuple(states), body)


def _is_name(t: str) -> bool:
    return bool(t) and (t[0].isalpha() or t[0] == "_")


@dataclass
class Formula:
    """A numbered formula tree with id lookup and parent links."""
    root: Node
    nodes: dict[int, Node] = field(init=False)
    parent: dict[int, Optional[int]] = field(init=False)

    def __post_init__(self):
        self.nodes = {}
        self.parent = {self.root.id: None}
        for n in walk(self.root):
            self.nodes[n.id] = n
            for c in children(n):
                self.parent[c.id] = n.id

    def __len__(self):
        return len(self.nodes)

    def __getitem__(self, nid: int) -> Node:
        return self.nodes[nid]

    @property
    def text(self) -> str:
        return to_text(self.root)

    def depth(self, nid: int) -> int:
        d = 0
        while self.parent[nid] is not None:
            nid = self.parent[nid]
            d += 1
        return d


def number(node: Node) -> Formula:
    return Formula(_number(node)[0])


def parse_formula(text: str, net: Optional[AutomataNetwork] = None) -> Formula:
    """Parse and number a formula; resolve names against ``net`` if given."""
    f = number(_Parser(text).parse())
    if net is not None:
        check_names(f, net)
    return f


def check_names(f: Formula, net: AutomataNetwork) -> None:
    for n in walk(f.root):
        ds: tuple[Designator, ...] = ()
        if isinstance(n, InState):
            ds = (n.where,)
        elif isinstance(n, QUANTIFIERS):
            ds = n.states
        elif isinstance(n, AtState) and isinstance(n.target, Designator):
            ds = (n.target,)
        elif isinstance(n, NextIn) and n.automaton not in net.names:
            raise FormulaError(f"unknown automaton {n.automaton!r}")
        elif isinstance(n, Sig) and n.name not in net.signals:
            raise FormulaError(f"unknown signal {n.name!r}")
        for d in ds:
            if d.automaton not in net.names:
                raise FormulaError(f"unknown automaton {d.automaton!r}")
            if not net.has_local(d.automaton, d.local):
                raise FormulaError(f"unknown local state {d}")


def free_atoms(f: Formula | Node) -> set[Node]:
    """Atomic propositions (signal and ``in a.p`` atoms) occurring in ``f``."""
    root = f.root if isinstance(f, Formula) else f
    return {dataclasses.replace(n, id=0) for n in walk(root) if isinstance(n, (Sig, InState))}


def reduction_atoms(f: Formula | Node) -> set[Node]:
    """``free_atoms`` plus the designators used by quantifier sets and ``a.p:``.

    A state-space reduction must keep these apart for quantified formulas
    to keep their verdicts.
    """
    root = f.root if isinstance(f, Formula) else f
    out = free_atoms(root)
    for n in walk(root):
        if isinstance(n, QUANTIFIERS):
            out.update(InState(d) for d in n.states)
        elif isinstance(n, AtState) and isinstance(n.target, Designator):
            out.add(InState(n.target))
    return out


def atom_text(atom: Node) -> str:
    return lexeme(atom)
