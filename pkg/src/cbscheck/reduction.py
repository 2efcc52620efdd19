"""Simplified stutter-collapse reduction of a reachability graph.

States are compared only on the atomic propositions of a formula.  A
maximal linear chain ``u1 -> u2 -> ... -> uk`` (each link the sole exit of
its source and the sole entry of its target) whose states agree on every
atom collapses to one quotient state.  Branch points are never merged, so
Next-free formulas keep their verdicts.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .csm import GlobalState, ReachabilityGraph, RGArc
from .engine import EvalContext, evaluate
from .formula import Node, lexeme

log = logging.getLogger(__name__)

__all__ = ["ReducedGraph", "reduce", "project_sequence", "segment_starts",
           "change_points", "valuation"]


@dataclass
class ReducedGraph:
    rg: ReachabilityGraph
    atoms: tuple[Node, ...]
    values: list[tuple[bool, ...]]
    classes: list[tuple[int, ...]]
    class_of: list[int]
    quotient: ReachabilityGraph
    notes: list[str] = field(default_factory=list)

    @property
    def representatives(self) -> list[int]:
        return [c[0] for c in self.classes]


def valuation(rg: ReachabilityGraph, atoms: Sequence[Node]) -> list[tuple[bool, ...]]:
    ctx = EvalContext(rg)
    return [tuple(evaluate(ctx, a, s) for a in atoms) for s in range(len(rg.states))]


def reduce(rg: ReachabilityGraph, atoms: Iterable[Node]) -> ReducedGraph:
    atoms = tuple(sorted(set(atoms), key=lexeme))
    notes = []
    if not atoms:
        notes.append("empty atom set: every linear chain collapses")
        log.warning(notes[-1])
    val = valuation(rg, atoms)
    n = len(rg.states)
    nxt: dict[int, int] = {}
    for u in range(n):
        if len(rg.succ[u]) == 1:
            v = rg.succ[u][0]
            if v != u and rg.pred[v] == (u,) and val[u] == val[v]:
                nxt[u] = v
    linked = set(nxt.values())

    chains: list[list[int]] = []
    placed: set[int] = set()
    for head in range(n):
        if head in linked:
            continue
        chain = [head]
        while chain[-1] in nxt:
            chain.append(nxt[chain[-1]])
        chains.append(chain)
        placed.update(chain)
    rings: set[int] = set()
    for head in range(n):
        # what is left are chains closed into a ring
        if head in placed:
            continue
        chain = [head]
        while nxt[chain[-1]] != head:
            chain.append(nxt[chain[-1]])
        chains.append(chain)
        placed.update(chain)
        rings.add(len(chains) - 1)

    order = sorted(range(len(chains)), key=lambda i: chains[i][0])
    classes = [tuple(chains[i]) for i in order]
    ring_classes = {order.index(i) for i in rings}
    class_of = [0] * n
    for c, members in enumerate(classes):
        for s in members:
            class_of[s] = c

    movers: dict[tuple[int, int], set[str]] = {}
    for a in rg.arcs:
        if nxt.get(a.src) == a.dst:
            continue
        movers.setdefault((class_of[a.src], class_of[a.dst]), set()).update(a.movers)
    for c in ring_classes:
        movers.setdefault((c, c), set())
    q_states = [GlobalState(c, rg.states[members[0]].components)
                for c, members in enumerate(classes)]
    q_arcs = [RGArc(src, dst, frozenset(m)) for (src, dst), m in sorted(movers.items())]
    quotient = ReachabilityGraph(rg.net, q_states, q_arcs, class_of[rg.initial])
    return ReducedGraph(rg, atoms, val, classes, class_of, quotient, notes)


def project_sequence(seq: Sequence[int], red: ReducedGraph) -> list[int]:
    out: list[int] = []
    for s in seq:
        c = red.class_of[s]
        if not out or out[-1] != c:
            out.append(c)
    return out


def segment_starts(seq: Sequence[int], red: ReducedGraph) -> list[tuple[int, int]]:
    """(1-based position, state) of the first original state of every
    projected segment; the states a reduced listing still shows."""
    out: list[tuple[int, int]] = []
    last = None
    for k, s in enumerate(seq, 1):
        c = red.class_of[s]
        if c != last:
            out.append((k, s))
            last = c
    return out


def change_points(seq: Sequence[int], red: ReducedGraph) -> int:
    return sum(red.values[a] != red.values[b] for a, b in zip(seq, seq[1:]))
