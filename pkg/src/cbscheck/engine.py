"""Sphere-based evaluation of QsCTL formulas over a reachability graph.

A sphere of ``s`` is one breadth-first layer: sphere 0 is ``{s}``,
sphere ``i`` holds the successors of sphere ``i-1`` not seen in any earlier
sphere.  Temporal operators are decided by walking spheres with a
per-operator stop condition; sequences are recovered by walking the
spheres back from the endpoint.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Optional

from .csm import ReachabilityGraph
from .formula import (
    ATOMS, And, AtState, Const, Designator, Exists, Finally, ForAll, Formula,
    Globally, Iff, Implies, InState, Next, NextIn, Node, Not, Or, Sig,
    StateVar, WeakUntil, children, walk,
)

log = logging.getLogger(__name__)

__all__ = [
    "EvalError", "SequenceNotFound", "Sphere", "SequenceQuery", "Optimizations",
    "EvalContext", "spheres", "evaluate", "find_sequence", "cyclic_states",
    "quantifier_members", "designated_state",
]

Pred = Callable[[int], bool]


class EvalError(ValueError):
    pass


class SequenceNotFound(LookupError):
    pass


@dataclass(frozen=True)
class Sphere:
    index: int
    members: tuple[int, ...]


def _layers(rg: ReachabilityGraph, s: int, expand: Optional[Pred] = None,
            parent: Optional[dict[int, int]] = None) -> Iterator[list[int]]:
    """Sphere layers of ``s``; only members passing ``expand`` are expanded.
    If ``parent`` is given it receives one expanded predecessor per state."""
    seen = {s}
    layer = [s]
    while layer:
        yield layer
        nxt: set[int] = set()
        for t in layer:
            if expand is None or expand(t):
                new = [u for u in rg.succ[t] if u not in seen and u not in nxt]
                nxt.update(new)
                if parent is not None:
                    for u in new:
                        parent[u] = t
        seen |= nxt
        layer = sorted(nxt)


def _refute(ctx: "EvalContext", n: Node, env, parent: dict[int, int], t: int) -> bool:
    # every ancestor of a violating state reaches it along expanded states
    if ctx.summarize:
        while t in parent:
            t = parent[t]
            ctx.store(n, t, env, False)
    return False


def spheres(rg: ReachabilityGraph, s: int) -> Iterator[Sphere]:
    for i, layer in enumerate(_layers(rg, s)):
        yield Sphere(i, tuple(layer))


@dataclass
class SequenceQuery:
    """Search parameters: from ``source``, stop at the first sphere holding a
    ``target`` state.  Only states satisfying ``restrict`` are expanded.

    ``side`` is an extra condition the target must meet (always true in the
    rule table); ``target_res`` and ``side_res`` are don't-care flags.
    """
    source: int
    target: Pred
    restrict: Optional[Pred] = None
    side: Optional[Pred] = None
    target_res: Optional[bool] = None
    side_res: Optional[bool] = None


def find_sequence(rg: ReachabilityGraph, q: SequenceQuery) -> list[int]:
    """Shortest path from ``q.source`` to a target, restricted as requested.

    Ties go to the smallest state id, both for the target and for each
    predecessor chosen while backtracking.
    """
    def is_target(t: int) -> bool:
        return q.target(t) and (q.side is None or q.side(t))

    def expand(t: int) -> bool:
        return q.restrict is None or q.restrict(t)

    found: Optional[int] = None
    layers: list[list[int]] = []
    for layer in _layers(rg, q.source, expand):
        layers.append(layer)
        hits = [t for t in layer if is_target(t)]
        if hits:
            found = hits[0]
            break
    if found is None:
        raise SequenceNotFound(f"no target state reachable from s{q.source}")
    path = [found]
    for layer in reversed(layers[:-1]):
        cur = path[-1]
        path.append(min(p for p in layer if expand(p) and rg.is_arc(p, cur)))
    path.reverse()
    return path


def cyclic_states(rg: ReachabilityGraph, region: Iterable[int]) -> set[int]:
    """States of ``region`` lying on a cycle of the induced subgraph (Tarjan)."""
    region = set(region)
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    out: set[int] = set()
    counter = 0
    for root in sorted(region):
        if root in index:
            continue
        work = [(root, iter(rg.succ[root]))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            pushed = False
            for w in it:
                if w not in region:
                    continue
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(rg.succ[w])))
                    pushed = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if pushed:
                continue
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                if len(comp) > 1 or rg.is_arc(v, v):
                    out.update(comp)
    return out


@dataclass
class Optimizations:
    """``memoization`` reuses verdicts per (subformula, state, binding);
    ``summarize`` additionally records verdicts for every state a sphere
    walk proved something about and prunes walks on them; ``short_circuit``
    skips operands whose value cannot change the result."""
    memoization: bool = True
    summarize: bool = True
    short_circuit: bool = True

    @classmethod
    def none(cls) -> "Optimizations":
        return cls(False, False, False)


@dataclass
class EvalContext:
    """Graph plus verdict cache.  The cache keeps one table per subformula,
    keyed by state and by the states bound to the subformula's free
    variables."""
    rg: ReachabilityGraph
    optimizations: Optimizations = field(default_factory=Optimizations)
    notes: list[str] = field(default_factory=list)

    def __post_init__(self):
        self._slots: dict[int, tuple[tuple[str, ...], dict]] = {}
        self._keep: list[Node] = []

    @property
    def summarize(self) -> bool:
        return self.optimizations.summarize and self.optimizations.memoization

    def slot(self, n: Node) -> tuple[tuple[str, ...], dict]:
        got = self._slots.get(id(n))
        if got is None:
            got = (tuple(sorted(_free_vars(n))), {})
            self._slots[id(n)] = got
            self._keep.append(n)
        return got

    def lookup(self, n: Node, s: int, env: dict[str, int]) -> Optional[bool]:
        if not self.optimizations.memoization:
            return None
        fv, table = self.slot(n)
        return table.get((s, *(env[v] for v in fv)) if fv else s)

    def store(self, n: Node, s: int, env: dict[str, int], value: bool) -> None:
        if self.optimizations.memoization:
            fv, table = self.slot(n)
            table[(s, *(env[v] for v in fv)) if fv else s] = value

    def cached(self) -> int:
        return sum(len(t) for _, t in self._slots.values())


def _free_vars(n: Node) -> set[str]:
    if isinstance(n, StateVar):
        return {n.var}
    out: set[str] = set()
    for c in children(n):
        out |= _free_vars(c)
    if isinstance(n, AtState) and isinstance(n.target, str):
        out.add(n.target)
    if isinstance(n, (ForAll, Exists)):
        out.discard(n.var)
    return out


def quantifier_members(rg: ReachabilityGraph, states: Iterable[Designator]) -> tuple[int, ...]:
    out: set[int] = set()
    for d in states:
        out.update(rg.matching(d.automaton, d.local))
    return tuple(sorted(out))


def designated_state(rg: ReachabilityGraph, n: AtState, env: dict[str, int]) -> int:
    if isinstance(n.target, str):
        return env[n.target]
    hits = rg.matching(n.target.automaton, n.target.local)
    if len(hits) != 1:
        raise EvalError(
            f"{n.target} designates {len(hits)} reachable states; exactly one is required"
        )
    return hits[0]


def evaluate(ctx: EvalContext, f: Formula | Node, s: int,
             env: Optional[dict[str, int]] = None) -> bool:
    """Verdict of ``f`` at state ``s`` (every path quantifier universal)."""
    node = f.root if isinstance(f, Formula) else f
    return _ev(ctx, node, s, dict(env or {}))


def _ev(ctx: EvalContext, n: Node, s: int, env: dict[str, int]) -> bool:
    if not ctx.optimizations.memoization:
        return _compute(ctx, n, s, env)
    fv, table = ctx.slot(n)
    key = (s, *(env[v] for v in fv)) if fv else s
    got = table.get(key)
    if got is None:
        got = table[key] = _compute(ctx, n, s, env)
    return got


def _both(ctx, n, s, env) -> tuple[bool, bool]:
    return _ev(ctx, n.left, s, env), _ev(ctx, n.right, s, env)


def _compute(ctx: EvalContext, n: Node, s: int, env: dict[str, int]) -> bool:
    rg = ctx.rg
    lazy = ctx.optimizations.short_circuit
    if isinstance(n, Const):
        return n.value
    if isinstance(n, Sig):
        return n.name in rg.generated[s]
    if isinstance(n, InState):
        return rg.states[s].components[rg.net.index(n.where.automaton)] == n.where.local
    if isinstance(n, StateVar):
        return env[n.var] == s
    if isinstance(n, Not):
        return not _ev(ctx, n.arg, s, env)
    if isinstance(n, And):
        if lazy:
            return _ev(ctx, n.left, s, env) and _ev(ctx, n.right, s, env)
        a, b = _both(ctx, n, s, env)
        return a and b
    if isinstance(n, Or):
        if lazy:
            return _ev(ctx, n.left, s, env) or _ev(ctx, n.right, s, env)
        a, b = _both(ctx, n, s, env)
        return a or b
    if isinstance(n, Implies):
        if lazy:
            return (not _ev(ctx, n.left, s, env)) or _ev(ctx, n.right, s, env)
        a, b = _both(ctx, n, s, env)
        return (not a) or b
    if isinstance(n, Iff):
        a, b = _both(ctx, n, s, env)
        return a == b
    if isinstance(n, Next):
        return _all(ctx, (_ev(ctx, n.arg, t, env) for t in rg.succ[s]))
    if isinstance(n, NextIn):
        return _all(ctx, (_ev(ctx, n.arg, t, env) for t in rg.successors_moving(s, n.automaton)))
    if isinstance(n, Globally):
        return _globally(ctx, n, s, env)
    if isinstance(n, Finally):
        return _finally(ctx, n, s, env)
    if isinstance(n, WeakUntil):
        return _weak_until(ctx, n, s, env)
    if isinstance(n, AtState):
        return _ev(ctx, n.arg, designated_state(rg, n, env), env)
    if isinstance(n, (ForAll, Exists)):
        members = quantifier_members(rg, n.states)
        if not members:
            note = f"quantifier set {{{', '.join(map(str, n.states))}}} is empty; " \
                   f"{'A' if isinstance(n, ForAll) else 'E'} is vacuously " \
                   f"{'true' if isinstance(n, ForAll) else 'false'}"
            if note not in ctx.notes:
                ctx.notes.append(note)
                log.warning(note)
        vals = (_ev(ctx, n.arg, m, {**env, n.var: m}) for m in members)
        if isinstance(n, ForAll):
            return _all(ctx, vals)
        return any(vals) if lazy else any(list(vals))
    raise TypeError(f"unknown formula node {n!r}")


def _all(ctx: EvalContext, vals: Iterable[bool]) -> bool:
    return all(vals) if ctx.optimizations.short_circuit else all(list(vals))


def _globally(ctx: EvalContext, n: Globally, s: int, env) -> bool:
    summarize = ctx.summarize
    visited: list[int] = []
    parent: dict[int, int] = {}

    def expand(t: int) -> bool:
        return not (summarize and ctx.lookup(n, t, env) is True)

    for layer in _layers(ctx.rg, s, expand, parent):
        for t in layer:
            if summarize and t != s:
                known = ctx.lookup(n, t, env)
                if known is False:
                    return _refute(ctx, n, env, parent, t)
                if known is True:
                    continue
            if not _ev(ctx, n.arg, t, env):
                return _refute(ctx, n, env, parent, t)
            visited.append(t)
    if summarize:
        for t in visited:
            ctx.store(n, t, env, True)
    return True


def _finally(ctx: EvalContext, n: Finally, s: int, env) -> bool:
    if _ev(ctx, n.arg, s, env):
        return True
    summarize = ctx.summarize
    region: list[int] = []
    # member expanded iff it is a not-phi state not already known to satisfy AF
    status: dict[int, bool] = {}

    def expand(t: int) -> bool:
        return status[t]

    for layer in _layers(ctx.rg, s, expand):
        for t in layer:
            if summarize and t != s:
                known = ctx.lookup(n, t, env)
                if known is True:
                    status[t] = False
                    continue
            if t != s and _ev(ctx, n.arg, t, env):
                status[t] = False
                continue
            if summarize and t != s and ctx.lookup(n, t, env) is False:
                return False
            status[t] = True
            region.append(t)
    if cyclic_states(ctx.rg, region):
        return False
    if summarize:
        for t in region:
            ctx.store(n, t, env, True)
    return True


def _weak_until(ctx: EvalContext, n: WeakUntil, s: int, env) -> bool:
    summarize = ctx.summarize
    lazy = ctx.optimizations.short_circuit
    expanded: dict[int, bool] = {}
    region: list[int] = []
    parent: dict[int, int] = {}

    def expand(t: int) -> bool:
        return expanded[t]

    for layer in _layers(ctx.rg, s, expand, parent):
        for t in layer:
            if summarize and t != s:
                known = ctx.lookup(n, t, env)
                if known is True:
                    expanded[t] = False
                    continue
                if known is False:
                    return _refute(ctx, n, env, parent, t)
            if lazy:
                psi = _ev(ctx, n.right, t, env)
                phi = psi or _ev(ctx, n.left, t, env)
            else:
                phi, psi = _both(ctx, n, t, env)
            if psi:
                expanded[t] = False
                continue
            if not phi:
                return _refute(ctx, n, env, parent, t)
            expanded[t] = True
            region.append(t)
    if summarize:
        for t in region:
            ctx.store(n, t, env, True)
    return True
