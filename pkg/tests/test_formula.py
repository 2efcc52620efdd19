import random

import pytest
from hypothesis import given, settings, strategies as st

from cbscheck.csm import build_rg
from cbscheck.formula import (
    And, Const, Exists, ForAll, FormulaError, Globally, Implies, InState, Next,
    Not, Or, Sig, StateVar, WeakUntil, free_atoms, lexeme, parse_formula,
    reduction_atoms, to_text, walk,
)
from cbscheck.synthetic import HANDSHAKE_FORMULA, random_formula, random_network


def kinds(f):
    return [type(n).__name__ for n in walk(f.root)]


def test_four_node_numbering():
    f = parse_formula("A s in {A.a0}; G ! ack")
    assert kinds(f) == ["ForAll", "Globally", "Not", "Sig"]
    assert [n.id for n in walk(f.root)] == [1, 2, 3, 4]


def test_handshake_formula_tree():
    f = parse_formula(HANDSHAKE_FORMULA)
    assert len(f) == 12
    assert kinds(f) == ["ForAll", "WeakUntil", "Next", "Not", "Sig", "WeakUntil", "And",
                        "Not", "Sig", "Not", "InState", "Sig"]
    assert [f[5].name, f[9].name, f[12].name] == ["CGVar", "CStartVal", "SetVarsOkFlg"]


def test_until_binds_looser_than_next():
    f = parse_formula("(N !x) U y")
    assert isinstance(f.root, WeakUntil) and isinstance(f.root.left, Next)


@pytest.mark.parametrize("text, shape", [
    ("a + b * c", Or), ("a * b + c", Or), ("a => b => c", Implies),
    ("!a * b", And), ("a U b U c", WeakUntil), ("G a U b", WeakUntil),
])
def test_precedence(text, shape):
    assert isinstance(parse_formula(text).root, shape)


def test_right_associative():
    f = parse_formula("a U b U c")
    assert isinstance(f.root.right, WeakUntil)
    f = parse_formula("a => b => c")
    assert isinstance(f.root.right, Implies)


def test_quantifier_body_is_greedy():
    f = parse_formula("A s in {A.a0}; s + G x")
    assert isinstance(f.root, ForAll) and isinstance(f.root.arg, Or)
    assert isinstance(f.root.arg.left, StateVar)


def test_exists_and_at_state():
    f = parse_formula("E v in {A.a0, B.b1}; v: F ack")
    assert isinstance(f.root, Exists) and len(f.root.states) == 2


@pytest.mark.parametrize("text", ["", "a +", "(a", "A s in {A}; x", "N[ ] a", "a b"])
def test_syntax_errors(text):
    with pytest.raises(FormulaError):
        parse_formula(text)


def test_name_resolution(toy1):
    net, _ = toy1
    parse_formula("G !ack", net)
    with pytest.raises(FormulaError):
        parse_formula("G !nope", net)
    with pytest.raises(FormulaError):
        parse_formula("in A.zz", net)
    with pytest.raises(FormulaError):
        parse_formula("N[C] ack", net)


def test_free_atoms():
    assert {lexeme(a) for a in free_atoms(parse_formula("G ! ack"))} == {"ack"}
    assert free_atoms(parse_formula("true")) == set()
    got = {lexeme(a) for a in free_atoms(parse_formula(HANDSHAKE_FORMULA))}
    assert got == {"CGVar", "CStartVal", "in SocketSocket.notConnected", "SetVarsOkFlg"}


def test_reduction_atoms_add_designators():
    f = parse_formula("A s in {A.a0}; B.b1: G ! ack")
    assert {lexeme(a) for a in reduction_atoms(f)} == {"ack", "in A.a0", "in B.b1"}


def test_contiguous_subtree_blocks():
    f = parse_formula(HANDSHAKE_FORMULA)
    for n in walk(f.root):
        ids = sorted(m.id for m in walk(n))
        assert ids == list(range(n.id, n.id + len(ids)))


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10 ** 9))
def test_roundtrip(seed):
    rng = random.Random(seed)
    net = random_network(rng)
    f = random_formula(rng, net, build_rg(net), depth=rng.randint(0, 5))
    again = parse_formula(to_text(f.root), net)
    assert again.root == f.root
    assert [n.id for n in walk(again.root)] == [n.id for n in walk(f.root)]
