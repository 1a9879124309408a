"""Compare E||X||^p against E||Y||^p (block-decoupled copy) over a grid.

Each row is one experiment with 99% intervals and the verdict relative to
the direction theory predicts: X above Y for negative exponents and for
Gaussian laws with p > 2, X below Y for 0 < p <= q.

    python3 scripts/correlation_table.py --N 200000
"""
import argparse
import math

from negembed import stablesim
from negembed.config import MomentNotFiniteError
from negembed.negft import LqNorm
from negembed.stablesim import StableSpec

SPACES = [("linf", math.inf), ("l3", 3.0), ("l1", 1.0), ("l2", 2.0)]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=4)
    ap.add_argument("--k", type=int, default=2)
    ap.add_argument("--stable-q", default="1.5,2")
    ap.add_argument("--p", default="-1.5,-1,-0.5,0.5,1,3")
    ap.add_argument("--atoms", default="identity,coupled")
    ap.add_argument("--N", type=int, default=200_000)
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()

    head = f"{'space':6} {'atoms':9} {'q':>4} {'p':>5} {'E_X':>12} {'ci':>9} {'E_Y':>12} {'ci':>9} {'est':>6}  verdict"
    print(head)
    print("-" * len(head))
    for name, nq in SPACES:
        space = LqNorm(nq, args.n)
        for preset in args.atoms.split(","):
            for q in (float(v) for v in args.stable_q.split(",")):
                spec = StableSpec(q, stablesim.ATOM_PRESETS[preset](args.n), args.k)
                for p in (float(v) for v in args.p.split(",")):
                    try:
                        r = stablesim.correlation_experiment(space, spec, p, args.N, args.seed)
                    except MomentNotFiniteError:
                        continue
                    est = "mom" if r.estimator == "median_of_means" else "mean"
                    print(f"{name:6} {preset:9} {q:4g} {p:5g} {r.E_X:12.6g} {r.ci_X:9.3g} "
                          f"{r.E_Y:12.6g} {r.ci_Y:9.3g} {est:>6}  {r.verdict}")


if __name__ == "__main__":
    main()
