"""Show what a stutter-collapsed state space does to a counterexample.

Builds the critical tree over the original graph and prints, for the
longest sequence, the signal listing before and after projection onto the
reduced graph.
"""
import argparse

from cbscheck.critical import build_tree
from cbscheck.csm import build_rg
from cbscheck.engine import EvalContext, evaluate
from cbscheck.formula import lexeme, parse_formula, reduction_atoms
from cbscheck.reduction import project_sequence, reduce, segment_starts
from cbscheck.synthetic import handshake_network
from cbscheck.views import render_seqdiagram

DEFAULT_FORMULA = "G (in SocketSocket.notConnected => (!CStartVal U SetVarsOkFlg))"


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--noise", type=int, default=2)
    ap.add_argument("--formula", default=DEFAULT_FORMULA)
    args = ap.parse_args()

    net = handshake_network(args.noise, 4, total=12)
    rg = build_rg(net)
    f = parse_formula(args.formula, net)
    if evaluate(EvalContext(rg), f, rg.initial):
        print("formula holds; nothing to compare")
        return
    red = reduce(rg, reduction_atoms(f))
    print(f"{len(rg)} states, {len(red.quotient)} after reduction over "
          + ", ".join(lexeme(a) for a in red.atoms))
    t = build_tree(rg, f, rg.initial)
    e = max(t.constructed(), key=lambda e: len(e.states))
    starts = segment_starts(e.states, red)
    print(f"node {e.node_id} ({lexeme(f[e.node_id])}): {len(e.states)} states, "
          f"{len(project_sequence(e.states, red))} after projection")
    print("-- original")
    print(render_seqdiagram(t, net, e.node_id), end="")
    print("-- reduced")
    print(render_seqdiagram(t, net, e.node_id, states=[s for _, s in starts],
                            numbers=[k for k, _ in starts]), end="")


if __name__ == "__main__":
    main()
