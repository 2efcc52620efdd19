"""Independent checker for critical trees.

Verdicts come from the fixed-point oracle and reachability is recomputed
here, so nothing below trusts the sphere engine or the tree builder.
"""
from cbscheck.formula import (
    ATOMS, And, AtState, Exists, Finally, ForAll, Globally, Iff, Implies,
    Next, NextIn, Not, Or, WeakUntil, children, walk,
)
from cbscheck.oracle import label

ROWS = {
    (Not, False): 1, (Not, True): 2, (Or, False): 3, (Or, True): 4,
    (And, False): 5, (And, True): 6, (Implies, False): 7, (Implies, True): 8,
    (Iff, False): 9, (Iff, True): 10, (Next, False): 11, (Next, True): 12,
    (NextIn, False): 13, (NextIn, True): 14, (Finally, False): 15, (Finally, True): 16,
    (Globally, False): 17, (Globally, True): 18, (WeakUntil, False): 19,
    (WeakUntil, True): 20, (AtState, False): 21, (AtState, True): 22,
    (ForAll, False): 23, (ForAll, True): 24, (Exists, False): 25, (Exists, True): 26,
}

# per row, one directive per child
DIRECTIVES = {
    1: ("T",), 2: ("F",), 3: ("F?", "F?"), 4: ("T", "T"), 5: ("F", "F"),
    6: ("T?", "T?"), 7: ("~", "~"), 8: ("F", "T"), 9: ("~", "~"), 10: ("~", "~"),
    11: ("F",), 12: ("T",), 13: ("F",), 14: ("T",), 15: ("F",), 16: ("T",),
    17: ("F",), 18: ("T",), 19: ("F", "F?"), 20: ("T", "T"), 21: ("F",), 22: ("T",),
    23: ("F",), 24: ("T",), 25: ("F",), 26: ("T",),
}


def wanted(directive, actual):
    return {"T": True, "F": False, "~": not actual,
            "F?": False if actual else actual, "T?": True if not actual else actual}[directive]


class Replayer:
    def __init__(self, tree):
        self.t = tree
        self.rg = tree.rg
        self.f = tree.formula
        self._labels = {}
        self.violations = []
        self.rows = set()

    def holds(self, node, s, env):
        key = (node.id, tuple(sorted(env.items())))
        if key not in self._labels:
            self._labels[key] = label(self.rg, node, dict(env))
        return s in self._labels[key]

    def reach_cycle(self, s, ok):
        """s lies on a cycle of the subgraph induced by states satisfying ok."""
        seen, todo = set(), [u for u in self.rg.succ[s] if ok(u)]
        while todo:
            u = todo.pop()
            if u == s:
                return True
            if u in seen:
                continue
            seen.add(u)
            todo.extend(v for v in self.rg.succ[u] if ok(v))
        return False

    def fail(self, nid, msg):
        self.violations.append(f"node {nid}: {msg}")

    def check(self):
        t, f = self.t, self.f
        ids = {n.id for n in walk(f.root)}
        if set(t.entries) != ids:
            self.fail(0, "entries do not cover the formula nodes")
            return self.violations
        root = t.entries[f.root.id]
        if not root.constructed or not root.states:
            self.fail(1, "root not constructed")
            return self.violations
        if not root.jump and root.states[0] != t.start:
            self.fail(1, f"root starts at s{root.states[0]}, not s{t.start}")
        if root.desired is not True or self.holds(f.root, t.start, {}):
            self.fail(1, "root must be false with desired true")
        self.node(f.root, root.states[0] if root.jump else t.start, {}, True)
        return self.violations

    def node(self, n, start, env, desired):
        e = self.t.entries[n.id]
        if not e.constructed:
            self.fail(n.id, "expected a constructed sequence")
            return
        seq = e.states
        if dict(e.env) != env:
            self.fail(n.id, f"binding {dict(e.env)} != {env}")
        if not e.jump and seq[0] != start:
            self.fail(n.id, f"sticking broken: starts at s{seq[0]}, parent ends at s{start}")
        for a, b in zip(seq, seq[1:]):
            if not self.rg.is_arc(a, b):
                self.fail(n.id, f"s{a} -> s{b} is not an arc")
        actual = self.holds(n, seq[0], env)
        if e.actual != actual or e.desired != desired or actual == desired:
            self.fail(n.id, f"actual/desired {e.actual}/{e.desired}, oracle {actual}, wanted {desired}")
        if isinstance(n, ATOMS):
            if seq != [seq[0]] or e.rule is not None:
                self.fail(n.id, "atom must have a rule-less singleton sequence")
            return
        row = ROWS[type(n), desired]
        self.rows.add(row)
        if e.rule != row:
            self.fail(n.id, f"rule {e.rule}, expected {row}")
            return
        env2, vacuous = self.endpoint(n, row, seq, env, e)
        kids = children(n)
        for k, c in enumerate(kids):
            ce = self.t.entries[c.id]
            if vacuous:
                if any(self.t.entries[m.id].skipped != "not reached" for m in walk(c)):
                    self.fail(c.id, "children of a vacuous step must be not reached")
                continue
            a = self.holds(c, seq[-1], env2)
            d = wanted(DIRECTIVES[row][k], a)
            if a == d:
                if ce.skipped != "value as desired" or ce.actual != a:
                    self.fail(c.id, "expected value as desired")
                for m in walk(c):
                    if m is not c and self.t.entries[m.id].skipped != "not reached":
                        self.fail(m.id, "below a skipped node must be not reached")
            else:
                self.node(c, seq[-1], env2, d)

    def endpoint(self, n, row, seq, env, e):
        """Checks the row's endpoint predicate; returns (child env, vacuous)."""
        rg, last = self.rg, seq[-1]
        h = lambda node, s, en=env: self.holds(node, s, en)
        bad = lambda msg: self.fail(n.id, f"row {row}: {msg}")
        if row <= 10 or row == 17:
            if len(seq) != 1:
                bad("sequence must be the start state")
        elif row in (11, 12, 13, 14):
            if row == 13 and len(seq) == 1:
                moving = [d for d in rg.succ[seq[0]] if n.automaton in rg.movers[seq[0], d]]
                if moving:
                    bad("vacuous step although a successor moves the automaton")
                return env, True
            if len(seq) != 2:
                bad("expected one step")
            elif row >= 13 and n.automaton not in rg.movers[seq[0], seq[1]]:
                bad("step does not move the automaton")
            elif h(n.arg, last) != (row in (11, 13)):
                bad("successor has the wrong argument value")
        elif row == 15:
            if not h(n.arg, last):
                bad("endpoint does not hold the argument")
        elif row == 16:
            neg = lambda s: not h(n.arg, s)
            if not all(neg(s) for s in seq):
                bad("argument holds somewhere on the sequence")
            if not self.reach_cycle(last, neg):
                bad("endpoint is not on a cycle avoiding the argument")
        elif row == 18:
            if h(n.arg, last):
                bad("endpoint holds the argument")
        elif row in (19, 20):
            phi = lambda s: h(n.left, s)
            psi = lambda s: h(n.right, s)
            if not all(phi(s) and not psi(s) for s in seq[:-1]):
                bad("prefix must hold the left argument only")
            if row == 20:
                if phi(last) or psi(last):
                    bad("endpoint must hold neither argument")
            elif phi(last) and psi(last):
                pass
            elif phi(last) and not psi(last):
                if not any(rg.is_arc(last, s) for s in seq):
                    bad("cycle endpoint does not close a cycle")
            elif not psi(last):
                bad("endpoint must hold the right argument or close a cycle")
        elif row in (21, 22):
            want = env[n.target] if isinstance(n.target, str) else None
            if want is None:
                hits = rg.matching(n.target.automaton, n.target.local)
                want = hits[0] if len(hits) == 1 else None
            if not e.jump or seq != [want]:
                bad(f"expected a jump to s{want}")
        else:
            members = [s for s in range(len(rg.states))
                       if any(rg.states[s].components[rg.net.index(d.automaton)] == d.local
                              for d in n.states)]
            if not members:
                if len(seq) != 1:
                    bad("empty set must give the start state")
                return env, True
            env2 = {**env, n.var: last}
            if not e.jump or len(seq) != 1 or last not in members:
                bad("expected a jump to a set member")
            elif h(n.arg, last, env2) != (row in (23, 25)):
                bad("member has the wrong body value")
            return env2, False
        return env, False


def replay(tree):
    r = Replayer(tree)
    return r.check(), r.rows
