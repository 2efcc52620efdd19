"""Critical trees: counterexamples for false verdicts.

One state sequence is built per formula node.  The rule for a node is
picked by its operator and its desired result (the opposite of its actual
result); the rule fixes which state ends the sequence and what the
children should be shown to evaluate to.  Each child sequence starts
where its parent's sequence ends, except below ``a.p:`` and the state
quantifiers, which jump to the state they name.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

from .csm import ReachabilityGraph
from .engine import (
    EvalContext, Optimizations, SequenceNotFound, SequenceQuery, _layers,
    cyclic_states, designated_state, evaluate, find_sequence,
    quantifier_members,
)
from .formula import (
    ATOMS, And, AtState, Exists, Finally, ForAll, Formula, Globally, Iff,
    Implies, Next, NextIn, Node, Not, Or, WeakUntil, children, walk,
)

__all__ = [
    "TreeError", "Rule", "RULES", "SequenceEntry", "CriticalTree", "dispatch_rule",
    "build_tree", "endpoint_search", "compress", "decompress", "CNode", "CEdge",
    "CompressedTree", "VALUE_AS_DESIRED", "NOT_REACHED",
]

VALUE_AS_DESIRED = "value as desired"
NOT_REACHED = "not reached"


class TreeError(RuntimeError):
    pass


@dataclass(frozen=True)
class Rule:
    row: int
    op: str
    desired: bool
    endpoint: str
    directives: tuple[str, ...]

    def child_desired(self, k: int, actual: bool) -> bool:
        d = self.directives[k]
        if d == "true":
            return True
        if d == "false":
            return False
        if d == "opposite":
            return not actual
        # "false if it is true" / "true if it is false": ask only when needed
        want = d == "true-if-false"
        return want if actual != want else actual


_START = "starting state"
RULES: dict[int, Rule] = {r.row: r for r in [
    Rule(1, "!", False, _START, ("true",)),
    Rule(2, "!", True, _START, ("false",)),
    Rule(3, "+", False, _START, ("false-if-true", "false-if-true")),
    Rule(4, "+", True, _START, ("true", "true")),
    Rule(5, "*", False, _START, ("false", "false")),
    Rule(6, "*", True, _START, ("true-if-false", "true-if-false")),
    Rule(7, "=>", False, _START, ("opposite", "opposite")),
    Rule(8, "=>", True, _START, ("false", "true")),
    Rule(9, "<=>", False, _START, ("opposite", "opposite")),
    Rule(10, "<=>", True, _START, ("opposite", "opposite")),
    Rule(11, "N", False, "successor holding the argument", ("false",)),
    Rule(12, "N", True, "successor not holding the argument", ("true",)),
    Rule(13, "N[a]", False, "successor in automaton a holding the argument", ("false",)),
    Rule(14, "N[a]", True, "successor in automaton a not holding the argument", ("true",)),
    Rule(15, "F", False, "state holding the argument", ("false",)),
    Rule(16, "F", True, "member of a cycle on which the argument never holds", ("true",)),
    Rule(17, "G", False, _START, ("false",)),
    Rule(18, "G", True, "state not holding the argument", ("true",)),
    Rule(19, "U", False, "state holding both arguments, or a left-argument state last in a cycle",
         ("false", "false-if-true")),
    Rule(20, "U", True, "state holding neither argument", ("true", "true")),
    Rule(21, ":", False, "the named state", ("false",)),
    Rule(22, ":", True, "the named state", ("true",)),
    Rule(23, "A", False, "member of the set satisfying the body", ("false",)),
    Rule(24, "A", True, "member of the set not satisfying the body", ("true",)),
    Rule(25, "E", False, "member of the set satisfying the body", ("false",)),
    Rule(26, "E", True, "member of the set not satisfying the body", ("true",)),
]}

_OPS = {Not: "!", Or: "+", And: "*", Implies: "=>", Iff: "<=>", Next: "N",
        NextIn: "N[a]", Finally: "F", Globally: "G", WeakUntil: "U",
        AtState: ":", ForAll: "A", Exists: "E"}
_DISPATCH = {(r.op, r.desired): r for r in RULES.values()}


def dispatch_rule(node: Node, desired: bool) -> Rule:
    """Rule row for an operator node and its desired result."""
    return _DISPATCH[_OPS[type(node)], desired]


@dataclass
class SequenceEntry:
    node_id: int
    desired: Optional[bool]
    actual: Optional[bool]
    rule: Optional[int]
    states: list[int]
    skipped: Optional[str] = None
    jump: bool = False
    env: tuple[tuple[str, int], ...] = ()
    note: Optional[str] = None

    @property
    def constructed(self) -> bool:
        return self.skipped is None


@dataclass
class CriticalTree:
    formula: Formula
    rg: ReachabilityGraph
    start: int
    entries: dict[int, SequenceEntry]

    def __getitem__(self, nid: int) -> SequenceEntry:
        return self.entries[nid]

    def constructed(self) -> list[SequenceEntry]:
        return [self.entries[n] for n in sorted(self.entries) if self.entries[n].constructed]


@dataclass
class _Endpoint:
    states: list[int]
    env: dict[str, int]
    jump: bool = False
    vacuous: bool = False
    note: Optional[str] = None


def endpoint_search(ctx: EvalContext, rule: Rule, node: Node, s: int,
                    env: Optional[dict[str, int]] = None) -> _Endpoint:
    """Sequence from ``s`` to the state that finishes ``rule`` for ``node``."""
    env = dict(env or {})
    rg = ctx.rg
    row = rule.row

    def holds(n: Node, e=env) -> Callable[[int], bool]:
        return lambda t: evaluate(ctx, n, t, e)

    def search(target, restrict=None) -> list[int]:
        try:
            return find_sequence(rg, SequenceQuery(s, target, restrict))
        except SequenceNotFound as exc:
            raise TreeError(f"rule {row}: no endpoint from s{s} for node {node.id}") from exc

    if row <= 10 or row == 17:
        return _Endpoint([s], env)
    if row in (11, 12, 13, 14):
        succ = rg.succ[s] if row <= 12 else rg.successors_moving(s, node.automaton)
        want = row in (11, 13)
        hits = [t for t in succ if evaluate(ctx, node.arg, t, env) == want]
        if not hits:
            if row == 13 and not succ:
                return _Endpoint([s], env, vacuous=True, note="no successor moves the automaton")
            raise TreeError(f"rule {row}: no suitable successor of s{s}")
        return _Endpoint([s, hits[0]], env)
    if row in (15, 18):
        phi = holds(node.arg)
        return _Endpoint(search(phi if row == 15 else (lambda t: not phi(t))), env)
    if row == 16:
        phi = holds(node.arg)
        avoid = lambda t: not phi(t)
        region = [t for layer in _layers(rg, s, avoid) for t in layer if avoid(t)]
        on_cycle = cyclic_states(rg, region)
        return _Endpoint(search(on_cycle.__contains__, avoid), env)
    if row in (19, 20):
        phi, psi = holds(node.left), holds(node.right)
        only_phi = lambda t: phi(t) and not psi(t)
        if row == 20:
            return _Endpoint(search(lambda t: not phi(t) and not psi(t), only_phi), env)
        return _weak_until_true(ctx, s, env, phi, psi, only_phi, search)
    if row in (21, 22):
        return _Endpoint([designated_state(rg, node, env)], env, jump=True)
    if row in (23, 24, 25, 26):
        members = quantifier_members(rg, node.states)
        if not members:
            return _Endpoint([s], env, vacuous=True, note="empty state set")
        want = row in (23, 25)
        for m in members:
            e = {**env, node.var: m}
            if evaluate(ctx, node.arg, m, e) == want:
                return _Endpoint([m], e, jump=True)
        raise TreeError(f"rule {row}: no suitable member of the state set")
    raise TreeError(f"no rule row {row}")


def _weak_until_true(ctx, s, env, phi, psi, only_phi, search) -> _Endpoint:
    rg = ctx.rg
    try:
        path = find_sequence(rg, SequenceQuery(s, lambda t: phi(t) and psi(t), only_phi))
        return _Endpoint(path, env, note="both arguments hold")
    except SequenceNotFound:
        pass
    region = [t for layer in _layers(rg, s, only_phi) for t in layer if only_phi(t)]
    on_cycle = cyclic_states(rg, region)
    if on_cycle:
        into = search(on_cycle.__contains__, only_phi)
        entry = into[-1]
        inside = set(region)
        back = find_sequence(rg, SequenceQuery(
            entry, lambda t: t in inside and rg.is_arc(t, entry), inside.__contains__))
        return _Endpoint(into + back[1:], env, note="last in a cycle")
    # every path leaves the left argument exactly where the right one holds
    return _Endpoint(search(psi, only_phi), env, note="right argument reached")


def build_tree(rg: ReachabilityGraph, f: Formula, s0: int,
               env: Optional[dict[str, int]] = None,
               ctx: Optional[EvalContext] = None) -> CriticalTree:
    """Critical tree for a formula that is false at ``s0``.

    Runs its own evaluation with short-circuiting off, so every operand is
    evaluated.  Verdicts are cached, but sequence endpoints never come from
    the cache: each one is found by a sphere search from the state where
    the sequence starts.
    """
    if ctx is None:
        ctx = EvalContext(rg, Optimizations(short_circuit=False))
    env = dict(env or {})
    if evaluate(ctx, f, s0, env):
        raise TreeError("the formula holds; a critical tree exists only for a false result")
    entries: dict[int, SequenceEntry] = {}
    _build(ctx, f.root, s0, env, True, entries)
    return CriticalTree(f, rg, s0, entries)


def _skip(node: Node, entries, reason: str, desired=None, actual=None) -> None:
    entries[node.id] = SequenceEntry(node.id, desired, actual, None, [], reason)
    for c in children(node):
        for n in walk(c):
            entries[n.id] = SequenceEntry(n.id, None, None, None, [], NOT_REACHED)


def _build(ctx: EvalContext, node: Node, s: int, env: dict[str, int],
           desired: bool, entries: dict[int, SequenceEntry]) -> None:
    actual = evaluate(ctx, node, s, env)
    if actual == desired:
        raise TreeError(f"node {node.id} already has its desired value at s{s}")
    envt = tuple(sorted(env.items()))
    if isinstance(node, ATOMS):
        entries[node.id] = SequenceEntry(node.id, desired, actual, None, [s], env=envt)
        return
    rule = dispatch_rule(node, desired)
    end = endpoint_search(ctx, rule, node, s, env)
    entries[node.id] = SequenceEntry(node.id, desired, actual, rule.row, end.states,
                                     jump=end.jump, env=envt, note=end.note)
    last = end.states[-1]
    for k, child in enumerate(children(node)):
        if end.vacuous:
            _skip(child, entries, NOT_REACHED)
            continue
        a = evaluate(ctx, child, last, end.env)
        d = rule.child_desired(k, a)
        if a == d:
            _skip(child, entries, VALUE_AS_DESIRED, d, a)
        else:
            _build(ctx, child, last, end.env, d, entries)


# --- compression ----------------------------------------------------------

@dataclass
class CEdge:
    node_id: int
    states: list[int]
    jump: bool
    target: "CNode"


@dataclass
class CNode:
    state: int
    labels: list[int] = field(default_factory=list)
    edges: list[CEdge] = field(default_factory=list)


@dataclass
class CompressedTree:
    """Single-state sequences folded into the node of their state; longer
    sequences (and jumps) become edges."""
    root: CNode
    formula: Formula
    rg: ReachabilityGraph
    start: int
    meta: dict[int, SequenceEntry]


def compress(t: CriticalTree) -> CompressedTree:
    root = CNode(t.start)
    ends: dict[Optional[int], CNode] = {None: root}
    for nid in sorted(t.entries):
        e = t.entries[nid]
        if not e.constructed:
            continue
        here = ends[t.formula.parent[nid]]
        if len(e.states) == 1 and e.states[0] == here.state:
            here.labels.append(nid)
            ends[nid] = here
        else:
            nxt = CNode(e.states[-1])
            here.edges.append(CEdge(nid, list(e.states), e.jump, nxt))
            ends[nid] = nxt
    meta = {n: replace(e, states=[]) for n, e in t.entries.items()}
    return CompressedTree(root, t.formula, t.rg, t.start, meta)


def decompress(c: CompressedTree) -> CriticalTree:
    states: dict[int, list[int]] = {}
    todo = [c.root]
    while todo:
        cn = todo.pop()
        for nid in cn.labels:
            states[nid] = [cn.state]
        for edge in cn.edges:
            states[edge.node_id] = list(edge.states)
            todo.append(edge.target)
    entries = {n: replace(e, states=states.get(n, [])) for n, e in c.meta.items()}
    return CriticalTree(c.formula, c.rg, c.start, entries)
