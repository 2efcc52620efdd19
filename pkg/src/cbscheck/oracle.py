"""Fixed-point labelling: the textbook CTL algorithm, used as a test oracle.

Every subformula is turned into the set of states where it holds.  AG is a
greatest fixed point, AF a least fixed point, A(f U_w g) the greatest
fixed point of ``g or (f and AX Z)``.  Nothing here is shared with the
sphere engine beyond the graph itself.
"""
from __future__ import annotations

from typing import Optional

from .csm import ReachabilityGraph
from .formula import (
    And, AtState, Const, Exists, Finally, ForAll, Formula, Globally, Iff,
    Implies, InState, Next, NextIn, Node, Not, Or, Sig, StateVar, WeakUntil,
)

__all__ = ["eval_oracle", "label", "OracleError"]


class OracleError(ValueError):
    pass


def eval_oracle(rg: ReachabilityGraph, f: Formula | Node, s: int,
                env: Optional[dict[str, int]] = None) -> bool:
    node = f.root if isinstance(f, Formula) else f
    return s in label(rg, node, dict(env or {}))


def _ax(rg: ReachabilityGraph, z: set[int], succ) -> set[int]:
    return {s for s in range(len(rg.states)) if all(t in z for t in succ(s))}


def label(rg: ReachabilityGraph, n: Node, env: dict[str, int]) -> frozenset[int]:
    everything = set(range(len(rg.states)))
    succ = rg.succ.__getitem__

    if isinstance(n, Const):
        return frozenset(everything if n.value else ())
    if isinstance(n, Sig):
        return frozenset(s for s in everything if n.name in rg.generated[s])
    if isinstance(n, InState):
        i = rg.net.automata.index(rg.net.automaton(n.where.automaton))
        return frozenset(s for s in everything if rg.states[s].components[i] == n.where.local)
    if isinstance(n, StateVar):
        return frozenset({env[n.var]})
    if isinstance(n, Not):
        return frozenset(everything - label(rg, n.arg, env))
    if isinstance(n, (And, Or, Implies, Iff)):
        a, b = label(rg, n.left, env), label(rg, n.right, env)
        if isinstance(n, And):
            return a & b
        if isinstance(n, Or):
            return a | b
        if isinstance(n, Implies):
            return frozenset((everything - a) | b)
        return frozenset(s for s in everything if (s in a) == (s in b))
    if isinstance(n, Next):
        return frozenset(_ax(rg, label(rg, n.arg, env), succ))
    if isinstance(n, NextIn):
        a = n.automaton
        return frozenset(_ax(rg, label(rg, n.arg, env),
                             lambda s: [t for t in rg.succ[s] if a in rg.movers[s, t]]))
    if isinstance(n, Globally):
        phi = label(rg, n.arg, env)
        z = set(everything)
        while True:
            nz = phi & _ax(rg, z, succ)
            if nz == z:
                return frozenset(z)
            z = nz
    if isinstance(n, Finally):
        phi = label(rg, n.arg, env)
        z: set[int] = set()
        while True:
            nz = phi | _ax(rg, z, succ)
            if nz == z:
                return frozenset(z)
            z = nz
    if isinstance(n, WeakUntil):
        phi, psi = label(rg, n.left, env), label(rg, n.right, env)
        z = set(everything)
        while True:
            nz = psi | (phi & _ax(rg, z, succ))
            if nz == z:
                return frozenset(z)
            z = nz
    if isinstance(n, AtState):
        if isinstance(n.target, str):
            target = env[n.target]
        else:
            i = [a.name for a in rg.net.automata].index(n.target.automaton)
            hits = [s.id for s in rg.states if s.components[i] == n.target.local]
            if len(hits) != 1:
                raise OracleError(f"{n.target} designates {len(hits)} states")
            target = hits[0]
        return frozenset(everything if target in label(rg, n.arg, env) else ())
    if isinstance(n, (ForAll, Exists)):
        names = [a.name for a in rg.net.automata]
        members = {
            s.id for s in rg.states for d in n.states
            if s.components[names.index(d.automaton)] == d.local
        }
        results = [m in label(rg, n.arg, {**env, n.var: m}) for m in members]
        ok = all(results) if isinstance(n, ForAll) else any(results)
        return frozenset(everything if ok else ())
    raise TypeError(f"unknown formula node {n!r}")
