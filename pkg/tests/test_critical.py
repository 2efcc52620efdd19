import random

import pytest
from hypothesis import given, settings, strategies as st

from cbscheck.critical import (
    NOT_REACHED, RULES, VALUE_AS_DESIRED, TreeError, build_tree, compress,
    decompress, dispatch_rule,
)
from cbscheck.csm import build_rg, load_model
from cbscheck.engine import EvalContext, evaluate
from cbscheck.formula import And, Not, WeakUntil, parse_formula
from cbscheck.synthetic import HANDSHAKE_FORMULA, random_formula, random_network
from conftest import FIXTURES
from replayer import replay

# one formula per rule row, each false at the given TOY1 state
DIRECTED = {
    1: ("!!ack", 0), 2: ("!go", 0), 3: ("!(go + ack)", 0), 4: ("ack + in A.a1", 0),
    5: ("!(go * in A.a0)", 0), 6: ("go * ack", 0), 7: ("!(ack => go)", 0),
    8: ("go => ack", 0), 9: ("!(go <=> in A.a0)", 0), 10: ("go <=> ack", 0),
    11: ("!(N ack)", 0), 12: ("N in A.a1", 0), 13: ("!(N[B] ack)", 0), 14: ("N[A] go", 1),
    15: ("!(F ack)", 0), 16: ("F go", 2), 17: ("!(G true)", 0), 18: ("G !ack", 0),
    19: ("!(go U ack)", 0), 20: ("ack U in A.a1", 0),
    21: ("A v in {A.a0}; !(v: go)", 0), 22: ("A v in {A.a0}; v: ack", 0),
    23: ("!(A v in {A.a0}; go)", 0), 24: ("A v in {A.a0}; ack", 0),
    25: ("!(E v in {A.a0}; go)", 0), 26: ("E v in {A.a1}; go", 0),
}


def tree(rg, text, s=0):
    return build_tree(rg, parse_formula(text, rg.net), s)


@pytest.mark.parametrize("row", sorted(DIRECTED))
def test_directed_rows(toy1, row):
    _, rg = toy1
    text, s = DIRECTED[row]
    t = tree(rg, text, s)
    assert row in {e.rule for e in t.entries.values()}
    violations, rows = replay(t)
    assert violations == []
    assert row in rows


@pytest.mark.parametrize("text, s, note, states", [
    ("!(!ack U ack)", 0, "right argument reached", [0, 1]),
    ("!((!ack) U false)", 3, "last in a cycle", [3]),
    ("!(go U ack)", 0, "both arguments hold", [0, 1]),
])
def test_row19_cases(toy1, text, s, note, states):
    _, rg = toy1
    t = tree(rg, text, s)
    e = t.entries[2]
    assert (e.rule, e.note, e.states) == (19, note, states)
    assert replay(t)[0] == []


def test_row19_cycle_through_entry():
    net = load_model(FIXTURES / "ring.csm")
    rg = build_rg(net)
    t = build_tree(rg, parse_formula("!(true U false)", net), 0)
    e = t.entries[2]
    assert e.note == "last in a cycle"
    assert rg.is_arc(e.states[-1], e.states[1])
    assert replay(t)[0] == []


def test_rule_table_is_total():
    assert sorted(RULES) == list(range(1, 27))
    assert dispatch_rule(WeakUntil(None, None), True).row == 20
    assert RULES[20].directives == ("true", "true")
    assert dispatch_rule(And(None, None), True).directives == ("true-if-false",) * 2
    r1 = dispatch_rule(Not(None), False)
    assert (r1.row, r1.endpoint, r1.directives) == (1, "starting state", ("true",))


def test_conditional_directives():
    r3 = RULES[3]
    assert r3.child_desired(0, True) is False
    assert r3.child_desired(0, False) is False  # already as desired
    r6 = RULES[6]
    assert r6.child_desired(0, False) is True
    assert r6.child_desired(0, True) is True


def test_toy1_ag_example(toy1):
    _, rg = toy1
    t = tree(rg, "A s in {A.a0}; G !ack")
    got = [(e.node_id, e.rule, e.states) for e in t.constructed()]
    assert got == [(1, 24, [0]), (2, 18, [0, 1]), (3, 2, [1]), (4, None, [1])]


@pytest.mark.parametrize("text, s, node, rule, states", [
    ("N (in A.a1)", 0, 1, 12, [0, 1]),
    ("G !ack", 0, 1, 18, [0, 1]),
    ("F go", 2, 1, 16, [2, 3]),
    ("ack U in A.a1", 0, 1, 20, [0]),
])
def test_endpoint_examples(toy1, text, s, node, rule, states):
    _, rg = toy1
    e = tree(rg, text, s).entries[node]
    assert (e.rule, e.states) == (rule, states)


def test_true_formula_has_no_tree(toy1):
    _, rg = toy1
    with pytest.raises(TreeError):
        tree(rg, "F in A.a1")


def test_handshake_dispatch_trace():
    net = load_model(FIXTURES / "handshake.csm")
    rg = build_rg(net)
    t = build_tree(rg, parse_formula(HANDSHAKE_FORMULA, net), 0)
    rules = {n: e.rule for n, e in t.entries.items() if e.constructed}
    assert rules == {1: 24, 2: 20, 3: 12, 4: 2, 5: None, 6: 20, 7: 6, 10: 2, 11: None, 12: None}
    assert t.entries[8].skipped == VALUE_AS_DESIRED
    assert t.entries[9].skipped == NOT_REACHED
    assert replay(t)[0] == []


def test_vacuous_next_in():
    net = load_model(FIXTURES / "handshake.csm")
    rg = build_rg(net)
    # Start never moves
    t = build_tree(rg, parse_formula("!(N[Start] false)", net), 0)
    e = t.entries[2]
    assert (e.rule, e.states) == (13, [0])
    assert t.entries[3].skipped == NOT_REACHED


def test_compress_merges_same_state_singletons(toy1):
    _, rg = toy1
    t = tree(rg, "A s in {A.a0}; G !ack")
    c = compress(t)
    assert c.root.labels == [1]
    (edge,) = c.root.edges
    assert edge.node_id == 2 and edge.states == [0, 1]
    assert edge.target.labels == [3, 4] and edge.target.state == 1
    assert decompress(c).entries == t.entries


def test_compress_handshake_groups_start_state():
    net = load_model(FIXTURES / "handshake.csm")
    rg = build_rg(net)
    c = compress(build_tree(rg, parse_formula(HANDSHAKE_FORMULA, net), 0))
    assert c.root.labels == [1, 2, 6, 7, 10, 11, 12]
    assert [e.node_id for e in c.root.edges] == [3]


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10 ** 9))
def test_random_trees_replay_and_roundtrip(seed):
    rng = random.Random(seed)
    net = random_network(rng)
    rg = build_rg(net)
    f = random_formula(rng, net, rg, depth=4)
    ctx = EvalContext(rg)
    for s in range(len(rg)):
        if evaluate(ctx, f, s):
            continue
        t = build_tree(rg, f, s)
        assert replay(t)[0] == []
        assert decompress(compress(t)).entries == t.entries
