"""Model and formula generators for differential tests and scale runs."""
from __future__ import annotations

import random
from typing import Optional

from .csm import (
    Arc, Automaton, AutomataNetwork, GAnd, GConst, GNot, GOr, GSig, Guard,
    ReachabilityGraph,
)
from .formula import (
    And, AtState, Const, Designator, Exists, Finally, ForAll, Formula, Globally,
    Iff, Implies, InState, Next, NextIn, Node, Not, Or, Sig, StateVar, WeakUntil,
    number,
)

__all__ = ["random_network", "random_formula", "toggles", "handshake_network",
           "HANDSHAKE_FORMULA", "OPERATORS"]


def _guard(rng: random.Random, signals: list[str], depth: int) -> Guard:
    if depth == 0 or rng.random() < 0.4:
        if not signals or rng.random() < 0.15:
            return GConst(rng.random() < 0.8)
        return GSig(rng.choice(signals))
    k = rng.randrange(3)
    if k == 0:
        return GNot(_guard(rng, signals, depth - 1))
    cls = GAnd if k == 1 else GOr
    return cls(_guard(rng, signals, depth - 1), _guard(rng, signals, depth - 1))


def random_network(rng: random.Random, max_automata: int = 5, max_states: int = 4,
                   max_signals: int = 3) -> AutomataNetwork:
    n = rng.randint(1, max_automata)
    shapes = []
    signals: list[str] = []
    for i in range(n):
        k = rng.randint(1, max_states)
        locs = [f"p{i}{j}" for j in range(k)]
        emits: dict[str, list[str]] = {p: [] for p in locs}
        for j in range(rng.randint(0, max_signals)):
            x = f"x{i}{j}"
            signals.append(x)
            emits[rng.choice(locs)].append(x)
        shapes.append((f"M{i}", locs, emits))
    automata = []
    for name, locs, emits in shapes:
        arcs = []
        for p in locs:
            for _ in range(rng.choice((0, 1, 1, 2, 2, 3))):
                arcs.append(Arc(p, rng.choice(locs), _guard(rng, signals, 2)))
        automata.append(Automaton(name, tuple(locs), locs[0],
                                  {p: tuple(e) for p, e in emits.items()}, tuple(arcs)))
    return AutomataNetwork(tuple(automata))


OPERATORS = ("const", "sig", "in", "var", "not", "and", "or", "implies", "iff",
             "next", "nextin", "finally", "globally", "until", "at", "forall", "exists")


def random_formula(rng: random.Random, net: AutomataNetwork, rg: ReachabilityGraph,
                   depth: int = 4, exclude: tuple[str, ...] = ()) -> Formula:
    """Random formula of at most ``depth`` operator levels.

    ``a.p:`` is only generated for designators naming exactly one
    reachable state, so every formula is well-defined on ``rg``.
    """
    unique = []
    for a in net.automata:
        for p in a.states:
            if len(rg.matching(a.name, p)) == 1:
                unique.append(Designator(a.name, p))
    designators = [Designator(a.name, p) for a in net.automata for p in a.states]
    signals = list(net.signals)

    def atom(bound: list[str]) -> Node:
        kinds = ["const", "in"] + (["sig"] if signals else []) + (["var"] if bound else [])
        kinds = [k for k in kinds if k not in exclude] or ["const"]
        k = rng.choice(kinds)
        if k == "const":
            return Const(rng.random() < 0.5)
        if k == "sig":
            return Sig(rng.choice(signals))
        if k == "var":
            return StateVar(rng.choice(bound))
        return InState(rng.choice(designators))

    def gen(d: int, bound: list[str]) -> Node:
        if d == 0 or rng.random() < 0.2:
            return atom(bound)
        ops = ["not", "and", "or", "implies", "iff", "next", "nextin", "finally",
               "globally", "until", "forall", "exists"]
        if unique or bound:
            ops.append("at")
        ops = [o for o in ops if o not in exclude]
        op = rng.choice(ops)
        if op in ("and", "or", "implies", "iff", "until"):
            cls = {"and": And, "or": Or, "implies": Implies, "iff": Iff, "until": WeakUntil}[op]
            return cls(gen(d - 1, bound), gen(d - 1, bound))
        if op == "not":
            return Not(gen(d - 1, bound))
        if op == "next":
            return Next(gen(d - 1, bound))
        if op == "nextin":
            return NextIn(rng.choice(net.automata).name, gen(d - 1, bound))
        if op == "finally":
            return Finally(gen(d - 1, bound))
        if op == "globally":
            return Globally(gen(d - 1, bound))
        if op == "at":
            choices = [*unique, *bound]
            target = rng.choice(choices)
            return AtState(target, gen(d - 1, bound))
        var = f"v{len(bound)}"
        states = tuple(sorted(set(rng.sample(designators, rng.randint(1, min(2, len(designators))))),
                              key=str))
        cls = ForAll if op == "forall" else Exists
        return cls(var, states, gen(d - 1, bound + [var]))

    return number(gen(depth, []))


def toggles(k: int) -> AutomataNetwork:
    """``k`` independent two-state automata that may toggle or stay at every
    step: 2**k reachable states and 4**k arcs."""
    automata = []
    for i in range(k):
        arcs = tuple(Arc(p, q, GConst(True)) for p in ("t0", "t1") for q in ("t0", "t1"))
        automata.append(Automaton(f"T{i}", ("t0", "t1"), "t0", {}, arcs))
    return AutomataNetwork(tuple(automata))


HANDSHAKE_FORMULA = ("A s in {SocketSocket.notConnected}; (N !CGVar) U "
             "((!CStartVal) * (!(in SocketSocket.notConnected))) U SetVarsOkFlg")

_PHASES = ("ProtVer", "Password", "Variables", "Values")


def handshake_network(noise: int = 5, noise_len: int = 4, loggers: Optional[int] = None,
                      total: int = 25) -> AutomataNetwork:
    """A connection handshake in the style of a plant-monitoring protocol.

    ``SocketSocket`` walks four servers through request/acknowledge pairs,
    then returns to ``notConnected``.  ``noise`` free-running cycles (each
    may pause in its first state) multiply the state space; passive
    logger automata pad the network to ``total`` automata.
    """
    A = []
    sock_states = ["notConnected"] + [f"conn{k}" for k in range(1, 5)] + ["connected"]
    emits = {"notConnected": (), "connected": ("Close",)}
    arcs = [Arc("notConnected", "conn1", GConst(True))]
    for k in range(1, 5):
        emits[f"conn{k}"] = (f"COnConnect{k}",)
        nxt = f"conn{k + 1}" if k < 4 else "connected"
        arcs.append(Arc(f"conn{k}", nxt, GSig(f"COnConnect{k}Ack")))
    arcs.append(Arc("connected", "notConnected", GSig("CloseAck")))
    A.append(Automaton("SocketSocket", tuple(sock_states), "notConnected", emits, tuple(arcs)))
    for k, phase in enumerate(_PHASES, 1):
        req, ack = f"COnConnect{k}", f"COnConnect{k}Ack"
        busy_emits = (ack, "CGVar") if phase == "Values" else (ack,)
        A.append(Automaton(f"{phase}OnConnect", ("idle", "busy"), "idle",
                           {"idle": (), "busy": busy_emits},
                           (Arc("idle", "busy", GSig(req)), Arc("busy", "idle", GNot(GSig(req))))))
    A.append(Automaton("Closer", ("idle", "busy"), "idle", {"idle": (), "busy": ("CloseAck",)},
                       (Arc("idle", "busy", GSig("Close")), Arc("busy", "idle", GNot(GSig("Close"))))))
    A.append(Automaton("VarsFlag", ("off", "on"), "off", {"off": (), "on": ("SetVarsOkFlg",)},
                       (Arc("off", "on", GAnd(GSig("COnConnect3Ack"), GSig("CStartVal"))),)))
    for i in range(noise):
        locs = tuple(f"n{j}" for j in range(noise_len))
        em = {p: () for p in locs}
        em[locs[-1]] = ("CStartVal",) if i == 0 else (f"Tick{i}",)
        arcs = [Arc(locs[j], locs[(j + 1) % noise_len], GConst(True)) for j in range(noise_len)]
        arcs.append(Arc(locs[0], locs[0], GConst(True)))
        A.append(Automaton(f"Noise{i}", locs, locs[0], em, tuple(arcs)))
    if loggers is None:
        loggers = max(0, total - len(A))
    heard = ["Close", "CGVar", "SetVarsOkFlg"] + [f"COnConnect{k}" for k in range(1, 5)]
    for i in range(loggers):
        x = heard[i % len(heard)]
        A.append(Automaton(f"Logger{i}", ("watch",), "watch", {"watch": ()},
                           (Arc("watch", "watch", GSig(x)),)))
    return AutomataNetwork(tuple(A))
