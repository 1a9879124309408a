"""Tabulate the transform of ||x||^-p along a path that exposes sign changes.

The path is xi(s) = (s, ..., s, 1) normalized, for s from the scan floor to
1; near s = 0 the transform for p < n - 3 turns negative.  Every
applicable route is evaluated so their agreement can be inspected.

    python3 scripts/transform_profile.py --q inf --n 4 --p 0.5,1.5,2.5
"""
import argparse
import csv
import math
import sys

import numpy as np

from negembed import negft
from negembed.config import DomainError, QuadratureConfig


def routes(q, n, p):
    out = []
    if math.isinf(q):
        if not float(p).is_integer():
            out.append(("closed", lambda x: negft.ft_linf_closed(p, x)))
        out.append(("quad_linf", lambda x: negft.ft_linf_quadrature(p, x)))
    else:
        out.append(("quad_lq", lambda x: negft.ft_lq_quadrature(q, p, x)))
        if not float(p).is_integer():
            cfg = QuadratureConfig(mc_samples=100_000)
            out.append(("lq_via_linf", lambda x: negft.ft_lq_via_linf(q, p, x, cfg)))
    if p >= n - 1:
        out.append(("sphere", lambda x: negft.ft_sphere(negft.LqNorm(q, n), p, x)))
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--q", default="inf")
    ap.add_argument("--n", type=int, default=4)
    ap.add_argument("--p", default="0.5,1.5,2.5")
    ap.add_argument("--points", type=int, default=13)
    ap.add_argument("--floor", type=float, default=1e-3)
    args = ap.parse_args()

    q = float(args.q)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["p", "s", "method", "value", "err"])
    for p in (float(v) for v in args.p.split(",")):
        for s in np.geomspace(args.floor, 1.0, args.points):
            xi = np.array([s] * (args.n - 1) + [1.0])
            xi /= np.linalg.norm(xi)
            for name, fn in routes(q, args.n, p):
                try:
                    r = fn(xi)
                except DomainError:
                    continue
                w.writerow([p, "%.6g" % s, name, "%.12g" % r.value, "%.3g" % r.err_estimate])


if __name__ == "__main__":
    main()
