"""Locate the sign-change boundary in p for several l_q^n spaces.

Writes one CSV row per space: q, n, estimate, bracket, and whether a
transition was found.  The expected boundary is n - 3 (none for n = 3).

    python3 scripts/critical_sweep.py --out sweep.csv
"""
import argparse
import csv
import math
import sys
import time

from negembed.config import ScanConfig
from negembed.embedcheck import critical_exponent
from negembed.negft import LqNorm


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--q", default="2.5,3,4,inf", help="comma-separated norm exponents (> 2)")
    ap.add_argument("--n", default="3,4,5", help="comma-separated dimensions")
    ap.add_argument("--grid", type=int, default=5)
    ap.add_argument("--samples", type=int, default=32)
    ap.add_argument("--width", type=float, default=0.05)
    ap.add_argument("--out", help="CSV path (default stdout)")
    args = ap.parse_args()

    cfg = ScanConfig(grid=args.grid, samples=args.samples)
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["q", "n", "expected", "estimate", "lower", "upper", "transition", "widened", "scans", "seconds"])
    for n in (int(v) for v in args.n.split(",")):
        for q in (float(v) for v in args.q.split(",")):
            t0 = time.perf_counter()
            r = critical_exponent(LqNorm(q, n), cfg, args.width)
            expected = n - 3 if n > 3 else float("nan")
            w.writerow([q, n, expected, f"{r.estimate:.4f}", f"{r.lower:.4f}", f"{r.upper:.4f}",
                        r.transition, r.widened, len(r.steps), f"{time.perf_counter() - t0:.1f}"])
            fh.flush()
    if args.out:
        fh.close()


if __name__ == "__main__":
    main()
