"""Compare the sphere engine with the fixed-point oracle on random inputs
and replay every critical tree.  Prints a summary and exits non-zero on
any disagreement."""
import argparse
import collections
import random
import sys
import time
from pathlib import Path

from cbscheck.critical import build_tree
from cbscheck.csm import build_rg
from cbscheck.engine import EvalContext, evaluate
from cbscheck.oracle import eval_oracle
from cbscheck.synthetic import random_formula, random_network

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))
from replayer import Replayer  # noqa: E402


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--networks", type=int, default=500)
    ap.add_argument("--formulas", type=int, default=20)
    ap.add_argument("--depth", type=int, default=4)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    t0 = time.perf_counter()
    verdicts = disagreements = trees = violations = 0
    rows: collections.Counter = collections.Counter()
    for k in range(args.networks):
        rng = random.Random(args.seed * 1_000_003 + k)
        net = random_network(rng)
        rg = build_rg(net)
        for _ in range(args.formulas):
            f = random_formula(rng, net, rg, depth=args.depth)
            ctx = EvalContext(rg)
            for s in range(len(rg)):
                v = evaluate(ctx, f, s)
                verdicts += 1
                if v != eval_oracle(rg, f, s):
                    disagreements += 1
                    print(f"disagreement: network {k}, s{s}, {f.text}")
                if not v:
                    r = Replayer(build_tree(rg, f, s))
                    bad = r.check()
                    trees += 1
                    violations += len(bad)
                    rows.update(r.rows)
                    for b in bad:
                        print(f"violation: network {k}, s{s}, {f.text}: {b}")
    print(f"{verdicts} verdicts, {disagreements} disagreements")
    print(f"{trees} trees, {violations} violations")
    print("rule rows: " + " ".join(f"{r}:{rows[r]}" for r in range(1, 27)))
    print(f"{time.perf_counter() - t0:.1f} s")
    return 1 if disagreements or violations else 0


if __name__ == "__main__":
    sys.exit(main())
