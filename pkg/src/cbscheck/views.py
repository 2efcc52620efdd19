"""Text renderings of a critical tree.

Three indented views (global states, local states per automaton, emitted
signals per automaton), an XML document combining all three, and the
``src --{ sig }--> dst`` listing for one sequence.
"""
from __future__ import annotations

import re
import xml.etree.ElementTree as ET
from importlib import resources
from typing import Iterable, Optional, Sequence

from .critical import CompressedTree, CriticalTree, VALUE_AS_DESIRED
from .csm import AutomataNetwork, listeners
from .formula import children, lexeme, walk

__all__ = [
    "VIEWS", "render", "render_states", "render_states_in_automata", "render_signals",
    "render_xml", "render_seqdiagram", "render_compressed", "seqdiagram_from_xml",
    "format_seqdiagram", "SEQ_LINE", "schema_path", "SeqDiagramError",
]

UNCHANGED = "·"
SEQ_LINE = re.compile(r"^(\d+\.|\d+\. \S+ --\{ \S+ \}--> \S+| \S+ --\{ \S+ \}--> \S+)$")


class SeqDiagramError(ValueError):
    pass


def _marks(states: Sequence[int]) -> list[str]:
    return ["OK"] * (len(states) - 1) + ["ERROR"]


def _skip_text(reason: str) -> str:
    return f"({reason} — not constructed)"


def _indented(t: CriticalTree, rows) -> str:
    """Walk the formula pre-order; ``rows(states)`` renders one sequence."""
    out: list[str] = []
    for node in walk(t.formula.root):
        depth = t.formula.depth(node.id)
        pad = "  " * depth
        out.append(pad + lexeme(node))
        e = t.entries[node.id]
        if not e.constructed:
            out.append(pad + "  " + _skip_text(e.skipped))
            continue
        out.extend(pad + "  " + r for r in rows(e.states))
    return "\n".join(out) + "\n"


def render_states(t: CriticalTree, net: AutomataNetwork) -> str:
    return _indented(t, lambda seq: [f"s{s}\t{m}" for s, m in zip(seq, _marks(seq))])


def _header(net: AutomataNetwork) -> str:
    return "\t".join(["state", *net.names, "mark"])


def render_states_in_automata(t: CriticalTree, net: AutomataNetwork) -> str:
    def rows(seq):
        prev = None
        for s, mark in zip(seq, _marks(seq)):
            comps = t.rg.states[s].components
            cells = [c if prev is None or c != p else UNCHANGED
                     for c, p in zip(comps, prev or comps)]
            prev = comps
            yield "\t".join([f"s{s}", *cells, mark])

    return _header(net) + "\n" + _indented(t, lambda seq: list(rows(seq)))


def _emissions(net: AutomataNetwork, comps) -> list[tuple[str, str, list[str]]]:
    """(emitter, signal, listeners) for every signal emitted in a state."""
    out = []
    for a, p in zip(net.automata, comps):
        for x in a.emits.get(p, ()):
            out.append((a.name, x, listeners(net, comps, x)))
    return out


def render_signals(t: CriticalTree, net: AutomataNetwork) -> str:
    def row(s, mark):
        comps = t.rg.states[s].components
        cells = {a: [] for a in net.names}
        for who, x, ls in _emissions(net, comps):
            cells[who].append(f"{x}(->{','.join(ls)})")
        return "\t".join([f"s{s}", *(" ".join(cells[a]) for a in net.names), mark])

    return _header(net) + "\n" + _indented(
        t, lambda seq: [row(s, m) for s, m in zip(seq, _marks(seq))])


def _b(v: bool) -> str:
    return "true" if v else "false"


def render_xml(t: CriticalTree, net: AutomataNetwork) -> str:
    root = ET.Element("critical-tree", {"formula": t.formula.text, "result": "false"})

    def add(parent: ET.Element, node) -> None:
        e = t.entries[node.id]
        attrs = {"id": str(node.id), "op": lexeme(node)}
        if e.rule is not None:
            attrs["rule"] = str(e.rule)
        if e.desired is not None:
            attrs["desired"] = _b(e.desired)
        if e.actual is not None:
            attrs["actual"] = _b(e.actual)
        if e.skipped:
            attrs["skipped"] = e.skipped.replace(" ", "-")
        if e.jump:
            attrs["jump"] = "true"
        el = ET.SubElement(parent, "node", attrs)
        if e.constructed:
            seq = ET.SubElement(el, "sequence")
            for s, mark in zip(e.states, _marks(e.states)):
                st = ET.SubElement(seq, "state", {"id": f"s{s}", "mark": mark})
                comps = t.rg.states[s].components
                for a, p in zip(net.names, comps):
                    ET.SubElement(st, "component", {"automaton": a, "local": p})
                for who, x, ls in _emissions(net, comps):
                    sig = ET.SubElement(st, "signal", {"name": x, "emitter": who})
                    for name in ls:
                        ET.SubElement(sig, "listener", {"automaton": name})
        for c in children(node):
            add(el, c)

    add(root, t.formula.root)
    ET.indent(root, space="  ")
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + ET.tostring(root, encoding="unicode") + "\n"


def format_seqdiagram(states: Iterable[list[tuple[str, str, list[str]]]],
                      numbers: Optional[Iterable[int]] = None) -> str:
    """Listing for a sequence given each state's (emitter, signal, listeners)."""
    out: list[str] = []
    states = list(states)
    numbers = list(numbers) if numbers is not None else list(range(1, len(states) + 1))
    for k, ems in zip(numbers, states):
        lines = [f"{who} --{{ {x} }}--> {dst}" for who, x, ls in ems for dst in ls]
        if not lines:
            out.append(f"{k}.")
            continue
        out.append(f"{k}. {lines[0]}")
        out.extend(" " + ln for ln in lines[1:])
    return "\n".join(out) + "\n"


def _sequence_for(t: CriticalTree, node_id: int) -> list[int]:
    if node_id not in t.entries:
        raise SeqDiagramError(f"unknown node {node_id}")
    e = t.entries[node_id]
    if len(e.states) < 2:
        raise SeqDiagramError(f"no temporal sequence at node {node_id}")
    return e.states


def render_seqdiagram(t: CriticalTree, net: AutomataNetwork, node_id: int,
                      states: Optional[Sequence[int]] = None,
                      numbers: Optional[Iterable[int]] = None) -> str:
    """Signal listing for the sequence of ``node_id``.

    ``states``/``numbers`` override the sequence and its numbering, which
    is how a reduced sequence is shown against the original one.
    """
    seq = _sequence_for(t, node_id) if states is None else list(states)
    return format_seqdiagram(
        (_emissions(net, t.rg.states[s].components) for s in seq), numbers)


def seqdiagram_from_xml(text: str, node_id: int) -> str:
    """The same listing, rebuilt from a document written by ``render_xml``."""
    root = ET.fromstring(text)
    for el in root.iter("node"):
        if el.get("id") == str(node_id):
            break
    else:
        raise SeqDiagramError(f"unknown node {node_id}")
    seq = el.find("sequence")
    states = [] if seq is None else seq.findall("state")
    if len(states) < 2:
        raise SeqDiagramError(f"no temporal sequence at node {node_id}")
    return format_seqdiagram(
        [(sig.get("emitter"), sig.get("name"),
          [ls.get("automaton") for ls in sig.findall("listener")])
         for sig in st.findall("signal")]
        for st in states)


def render_compressed(c: CompressedTree, net: AutomataNetwork) -> str:
    """States view of a compressed tree: one line per state node listing the
    single-state sequences it holds, one line per multi-state edge."""
    f = c.formula
    out: list[str] = []

    def label(nid: int) -> str:
        return f"({nid}) {lexeme(f[nid])}"

    def visit(cn, depth: int) -> None:
        pad = "  " * depth
        out.append(f"{pad}s{cn.state}: " + ", ".join(label(n) for n in cn.labels))
        for edge in cn.edges:
            if edge.jump:
                path = f"jump to s{edge.states[-1]}"
            else:
                path = ", ".join(f"s{s} {m}" for s, m in zip(edge.states, _marks(edge.states)))
            out.append(f"{pad}  {label(edge.node_id)}: {path}")
            visit(edge.target, depth + 2)

    visit(c.root, 0)
    skipped = [n for n, e in sorted(c.meta.items()) if e.skipped == VALUE_AS_DESIRED]
    for n in skipped:
        out.append(f"{label(n)} {_skip_text(VALUE_AS_DESIRED)}")
    return "\n".join(out) + "\n"


VIEWS = {
    "states": render_states,
    "automata": render_states_in_automata,
    "signals": render_signals,
    "xml": render_xml,
}


def render(kind: str, t: CriticalTree, net: AutomataNetwork) -> str:
    return VIEWS[kind](t, net)


def schema_path():
    return resources.files("cbscheck").joinpath("critical-tree.xsd")
