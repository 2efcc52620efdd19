import random
import xml.etree.ElementTree as ET

import pytest
import xmlschema
from hypothesis import given, settings, strategies as st

from cbscheck.critical import build_tree, compress
from cbscheck.csm import build_rg, load_model
from cbscheck.engine import EvalContext, evaluate
from cbscheck.formula import parse_formula
from cbscheck.synthetic import HANDSHAKE_FORMULA, random_formula, random_network
from cbscheck.views import (
    SEQ_LINE, UNCHANGED, SeqDiagramError, render_compressed, render_seqdiagram,
    render_signals, render_states, render_states_in_automata, render_xml,
    schema_path, seqdiagram_from_xml,
)
from conftest import FIXTURES

AG = "A s in {A.a0}; G !ack"


@pytest.fixture
def ag_tree(toy1):
    net, rg = toy1
    return net, build_tree(rg, parse_formula(AG, net), 0)


@pytest.fixture(scope="module")
def schema():
    return xmlschema.XMLSchema(str(schema_path()))


def test_states_view(ag_tree):
    net, t = ag_tree
    assert render_states(t, net).splitlines() == [
        "A s in {A.a0};", "  s0\tERROR",
        "  G", "    s0\tOK", "    s1\tERROR",
        "    !", "      s1\tERROR",
        "      ack", "        s1\tERROR",
    ]


def test_states_view_skipped_nodes():
    net = load_model(FIXTURES / "handshake.csm")
    rg = build_rg(net)
    doc = render_states(build_tree(rg, parse_formula(HANDSHAKE_FORMULA, net), 0), net)
    lines = doc.splitlines()
    k = lines.index("        !", lines.index("      *"))
    assert lines[k + 1] == "          (value as desired — not constructed)"
    assert "(not reached — not constructed)" in doc


def test_automata_view(ag_tree):
    net, t = ag_tree
    lines = render_states_in_automata(t, net).splitlines()
    assert lines[0] == "state\tA\tB\tmark"
    assert lines[4:6] == ["    s0\ta0\tb0\tOK", f"    s1\t{UNCHANGED}\tb1\tERROR"]


def test_automata_view_self_loop(toy1):
    net, rg = toy1
    # F go from s2: [s2, s3] then the loop; use a N step on s3 instead
    t = build_tree(rg, parse_formula("N go", net), 3)
    lines = render_states_in_automata(t, net).splitlines()
    assert lines[2:4] == ["  s3\ta1\tb0\tOK", f"  s3\t{UNCHANGED}\t{UNCHANGED}\tERROR"]


def test_signals_view(ag_tree):
    net, t = ag_tree
    lines = render_signals(t, net).splitlines()
    assert lines[2] == "  s0\tgo(->B)\t\tERROR"
    assert lines[5] == "    s1\tgo(->B)\tack(->A)\tERROR"


def test_signal_without_listener():
    net = load_model(FIXTURES / "handshake.csm")
    rg = build_rg(net)
    t = build_tree(rg, parse_formula("G !SetVarsOkFlg", net), 0)
    assert "SetVarsOkFlg(->)" in render_signals(t, net)


def _carry_forward(lines, width):
    cur = None
    for ln in lines:
        cells = ln.strip().split("\t")
        if len(cells) != width + 2 or not cells[0][1:].isdigit():
            cur = None
            continue
        comps = cells[1:-1]
        cur = [c if c != UNCHANGED else p for c, p in zip(comps, cur or comps)]
        yield int(cells[0][1:]), tuple(cur)


def test_xml_document(ag_tree, schema):
    net, t = ag_tree
    doc = render_xml(t, net)
    schema.validate(doc)
    root = ET.fromstring(doc)
    nodes = list(root.iter("node"))
    assert len(nodes) == 4 and nodes[0].get("id") == "1"
    assert ET.tostring(ET.fromstring(ET.tostring(root))) == ET.tostring(root)


def test_xml_signal_without_listener(schema):
    net = load_model(FIXTURES / "handshake.csm")
    rg = build_rg(net)
    t = build_tree(rg, parse_formula("G !SetVarsOkFlg", net), 0)
    doc = render_xml(t, net)
    schema.validate(doc)
    sig = [s for s in ET.fromstring(doc).iter("signal") if s.get("name") == "SetVarsOkFlg"]
    assert sig and all(len(s) == 0 for s in sig)


def test_seqdiagram(ag_tree):
    net, t = ag_tree
    doc = render_seqdiagram(t, net, 2)
    assert doc.splitlines() == ["1. A --{ go }--> B", "2. A --{ go }--> B", " B --{ ack }--> A"]
    assert all(SEQ_LINE.match(ln) for ln in doc.splitlines())
    assert seqdiagram_from_xml(render_xml(t, net), 2) == doc


def test_seqdiagram_bare_lines():
    net = load_model(FIXTURES / "ring.csm")
    rg = build_rg(net)
    t = build_tree(rg, parse_formula("G !in R.r3", net), 0)
    assert render_seqdiagram(t, net, 1) == "1.\n2.\n3.\n4.\n"


@pytest.mark.parametrize("node, msg", [(4, "no temporal sequence"), (9, "unknown node")])
def test_seqdiagram_errors(ag_tree, node, msg):
    net, t = ag_tree
    with pytest.raises(SeqDiagramError, match=msg):
        render_seqdiagram(t, net, node)
    with pytest.raises(SeqDiagramError, match=msg):
        seqdiagram_from_xml(render_xml(t, net), node)


def test_compressed_view(ag_tree):
    net, t = ag_tree
    assert render_compressed(compress(t), net).splitlines() == [
        "s0: (1) A s in {A.a0};",
        "  (2) G: s0 OK, s1 ERROR",
        "    s1: (3) !, (4) ack",
    ]


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 9))
def test_view_invariants(seed):
    rng = random.Random(seed)
    net = random_network(rng)
    rg = build_rg(net)
    f = random_formula(rng, net, rg, depth=3)
    if evaluate(EvalContext(rg), f, rg.initial):
        return
    t = build_tree(rg, f, rg.initial)
    states = render_states(t, net)
    assert states.count("\tERROR") == len(t.constructed())
    rows = list(_carry_forward(render_states_in_automata(t, net).splitlines(), len(net.automata)))
    assert all(rg.states[s].components == comps for s, comps in rows)
    assert render_xml(t, net) == render_xml(t, net)
