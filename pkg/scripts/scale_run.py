"""Time graph construction, evaluation and tree building on a large network.

Prints a JSON record; peak memory is the process's maximum resident set.
"""
import argparse
import json
import resource
import time

from cbscheck.critical import build_tree
from cbscheck.csm import build_rg
from cbscheck.engine import EvalContext, evaluate
from cbscheck.formula import parse_formula
from cbscheck.synthetic import HANDSHAKE_FORMULA, handshake_network


def run(noise: int, noise_len: int) -> dict:
    t0 = time.perf_counter()
    net = handshake_network(noise, noise_len)
    rg = build_rg(net)
    t1 = time.perf_counter()
    f = parse_formula(HANDSHAKE_FORMULA, net)
    verdict = evaluate(EvalContext(rg), f, rg.initial)
    t2 = time.perf_counter()
    tree = None if verdict else build_tree(rg, f, rg.initial)
    t3 = time.perf_counter()
    return {
        "automata": len(net.automata),
        "states": len(rg),
        "arcs": len(rg.arcs),
        "verdict": verdict,
        "sequences": 0 if tree is None else len(tree.constructed()),
        "longest": 0 if tree is None else max(len(e.states) for e in tree.constructed()),
        "build_s": round(t1 - t0, 3),
        "eval_s": round(t2 - t1, 3),
        "tree_s": round(t3 - t2, 3),
        "total_s": round(t3 - t0, 3),
        "peak_mb": round(resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024, 1),
    }


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--noise", type=int, default=5, help="free-running cycle automata")
    ap.add_argument("--noise-len", type=int, default=4, help="states per cycle")
    args = ap.parse_args()
    print(json.dumps(run(args.noise, args.noise_len)))


if __name__ == "__main__":
    main()
