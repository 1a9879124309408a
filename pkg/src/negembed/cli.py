"""Command-line front end.

Every subcommand prints one canonical JSON document.  Exit codes: 0 success,
1 self-test failure, 2 invalid input or undefined quantity, 3 numerical
non-convergence (the payload is still printed).
"""
from __future__ import annotations

import argparse
import csv
import math
import os
import sys
import time
from dataclasses import replace

import numpy as np

from . import __version__, acceptance, embedcheck, jsonio, negft, specfun, stablesim
from .config import (
    CONFIG_ENV,
    DomainError,
    NegembedError,
    NonConvergenceError,
    QuadratureConfig,
    ScanConfig,
    quad_config_from,
    read_kv_file,
)

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(DomainError):
    pass


# ------------------------------------------------------------- parsing


def parse_vector(text: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.split(",") if v.strip()])
    except ValueError:
        raise UsageError(f"cannot parse vector {text!r}") from None


def read_atoms(path: str) -> np.ndarray:
    """CSV with a ``m=<int>`` header line, then n rows of m reals."""
    with open(path, encoding="utf-8", newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows or not rows[0][0].strip().startswith("m="):
        raise UsageError(f"{path}: first line must be m=<int>")
    m = int(rows[0][0].strip()[2:])
    body = [[float(c) for c in r] for r in rows[1:]]
    if not body or any(len(r) != m for r in body):
        raise UsageError(f"{path}: every row must have m={m} entries")
    return np.array(body)


def parse_q(text: str | float | None) -> float:
    if text is None:
        raise UsageError("--q is required for this space")
    if isinstance(text, str) and text.lower() in ("inf", "infinity"):
        return math.inf
    return float(text)


def build_space(kind: str, n: int | None, q=None, r: float | None = None, spectral_file: str | None = None):
    """``linf``, ``lq`` (with q), ``l<number>``, or ``spectral`` (atoms file, r)."""
    kind = kind.lower()
    if kind == "spectral":
        if not spectral_file or r is None:
            raise UsageError("spectral space needs --spectral-file and --r")
        sp = negft.SpectralSubspace(read_atoms(spectral_file), r)
        if n is not None and n != sp.n:
            raise UsageError(f"--n {n} does not match atoms with {sp.n} rows")
        return sp
    if n is None:
        raise UsageError("--n is required")
    if kind == "linf":
        return negft.LqNorm(math.inf, n)
    if kind == "lq":
        return negft.LqNorm(parse_q(q), n)
    if kind.startswith("l"):
        try:
            return negft.LqNorm(parse_q(kind[1:]), n)
        except ValueError:
            pass
    raise UsageError(f"unknown space {kind!r}")


def load_overrides(args) -> dict[str, str]:
    out: dict[str, str] = {}
    env = os.environ.get(CONFIG_ENV)
    if env:
        out.update(read_kv_file(env))
    if getattr(args, "config", None):
        out.update(read_kv_file(args.config))
    return out


def quad_config(args) -> QuadratureConfig:
    cfg = quad_config_from(load_overrides(args))
    kw = {}
    for name in ("rel_tol", "abs_tol", "mc_samples", "sphere_rel_tol"):
        v = getattr(args, name, None)
        if v is not None:
            kw[name] = v
    return replace(cfg, **kw) if kw else cfg


def scan_config(args) -> ScanConfig:
    over = load_overrides(args)
    base = ScanConfig()
    kw = {}
    for name, conv in (("grid", int), ("samples", int), ("seed", int), ("floor", float), ("decision_tol", float)):
        if name in over:
            kw[name] = conv(over[name])
        v = getattr(args, name, None)
        if v is not None:
            kw[name] = v
    return replace(base, quad=quad_config(args), **kw)


def emit(doc: dict, schema: str, out=None) -> None:
    jsonio.validate(doc, schema)
    (out or sys.stdout).write(jsonio.dumps(doc))


def params_of(args) -> dict:
    skip = {"func", "timing"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip and v is not None}


def _manifest(args, seed=None, t0=None) -> dict:
    wall = time.perf_counter() - t0 if (t0 is not None and args.timing) else None
    return jsonio.manifest(args.command, params_of(args), seed, wall)


# ----------------------------------------------------------- transform

METHOD_TAGS = {"closed": "closed", "quad": "quad_linf", "lq": "quad_lq", "lq-via-linf": "lq_via_linf", "sphere": "sphere"}


def _applicable(space, p: float) -> list[str]:
    n = space.n
    out = []
    if isinstance(space, negft.LqNorm):
        if space.is_max:
            if not float(p).is_integer():
                out.append("closed")
            out.append("quad")
        else:
            out.append("lq")
            if not float(p).is_integer():
                out.append("lq-via-linf")
    if n >= 2 and n - 1 <= p < n:
        out.append("sphere")
    return out


def _run_method(method: str, space, p: float, xi, cfg: QuadratureConfig) -> negft.TransformValue:
    if method == "sphere":
        return negft.ft_sphere(space, p, xi, cfg)
    if not isinstance(space, negft.LqNorm):
        raise UsageError(f"method {method} needs an l_q space")
    if method == "closed":
        if not space.is_max:
            raise UsageError("closed form exists only for the max-norm")
        return negft.ft_linf_closed(p, xi)
    if method == "quad":
        if not space.is_max:
            raise UsageError("quad is the max-norm quadrature; use --method lq")
        return negft.ft_linf_quadrature(p, xi, cfg)
    if method == "lq":
        return negft.ft_lq_quadrature(space.q, p, xi, cfg)
    if method == "lq-via-linf":
        return negft.ft_lq_via_linf(space.q, p, xi, cfg)
    raise UsageError(f"unknown method {method}")


def cmd_transform(args) -> int:
    t0 = time.perf_counter()
    space = build_space(args.space, args.n, args.q, args.r, args.spectral_file)
    xi = parse_vector(args.xi)
    if xi.size != space.n:
        raise UsageError(f"--xi has {xi.size} entries, expected n={space.n}")
    cfg = quad_config(args)
    methods = _applicable(space, args.p) if args.method == "all" else [args.method]
    if not methods:
        raise UsageError("no transform route applies to this space and p")
    results: dict = {}
    status = "ok"
    for m in methods:
        try:
            results[m] = _run_method(m, space, args.p, xi, cfg).to_dict()
        except NonConvergenceError as exc:
            status = "nonconvergence"
            results[m] = negft.TransformValue(exc.estimate, exc.error, METHOD_TAGS[m], False).to_dict()
        except DomainError as exc:
            if args.method != "all":
                raise
            results[m] = {"error": str(exc)}
    for r in results.values():
        if "converged" in r and not r["converged"]:
            status = "nonconvergence"
    agreement = []
    ok = [m for m in methods if "value" in results[m]]
    for i, a in enumerate(ok):
        for b in ok[i + 1 :]:
            ra, rb = results[a], results[b]
            delta = abs(ra["value"] - rb["value"])
            comb = ra["err_estimate"] + rb["err_estimate"]
            agreement.append({"a": a, "b": b, "delta": delta, "combined_err": comb, "agree": delta <= comb})
    reference = None
    if isinstance(space, negft.LqNorm) and space.q == 2 and 0 < args.p < space.n:
        reference = {"kind": "gaussian_kernel", "value": negft.riesz_transform(args.p, xi)}
    doc = {
        "manifest": _manifest(args, None, t0),
        "results": results,
        "agreement": agreement,
        "reference": reference,
        "status": status,
    }
    emit(doc, "transform")
    return EXIT_NUMERIC if status != "ok" else EXIT_OK


# ------------------------------------------------------------- scans


def _dump_grid(path: str, rep: embedcheck.SignScanReport) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        n = rep.points.shape[1]
        w.writerow([f"xi{i + 1}" for i in range(n)] + ["value", "err"])
        for x, v, e in zip(rep.points, rep.values, rep.errors):
            w.writerow(["%.17g" % c for c in x] + ["%.17g" % v, "%.17g" % e])


def cmd_signscan(args) -> int:
    t0 = time.perf_counter()
    space = build_space(args.space, args.n, args.q, args.r, args.spectral_file)
    cfg = scan_config(args)
    rep = embedcheck.sign_scan(space, args.p, cfg)
    if args.dump_grid:
        _dump_grid(args.dump_grid, rep)
    emit({"manifest": _manifest(args, cfg.seed, t0), "report": rep.to_dict()}, "signscan")
    return EXIT_OK if rep.failures == 0 else EXIT_NUMERIC


def cmd_certify(args) -> int:
    t0 = time.perf_counter()
    rep = embedcheck.sign_change_certificate(parse_q(args.q), args.n, args.p)
    emit({"manifest": _manifest(args, None, t0), "report": rep.to_dict()}, "certify")
    return EXIT_OK


def cmd_critical(args) -> int:
    t0 = time.perf_counter()
    space = build_space(args.space, args.n, args.q)
    cfg = scan_config(args)
    rep = embedcheck.critical_exponent(space, cfg, args.width)
    emit({"manifest": _manifest(args, cfg.seed, t0), "report": rep.to_dict()}, "critical")
    return EXIT_OK


# ----------------------------------------------------------- simulate


def cmd_simulate(args) -> int:
    t0 = time.perf_counter()
    space = build_space(args.space, args.n, args.norm_q)
    if args.atoms_file:
        atoms = read_atoms(args.atoms_file)
        args.atoms = None  # the preset was not used; keep it out of the echo
    else:
        atoms = stablesim.ATOM_PRESETS[args.atoms](space.n)
    spec = stablesim.StableSpec(args.q, atoms, args.k)
    capture: dict | None = {} if args.dump_samples else None
    rep = stablesim.correlation_experiment(
        space, spec, args.p, args.N, args.seed, args.estimator, args.partitions, capture
    )
    if args.dump_samples:
        with open(args.dump_samples, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            n = space.n
            w.writerow(["index"] + [f"x{i + 1}" for i in range(n)] + [f"y{i + 1}" for i in range(n)])
            for i, (x, y) in enumerate(zip(capture["X"], capture["Y"])):
                w.writerow([i] + ["%.17g" % c for c in x] + ["%.17g" % c for c in y])
    emit({"manifest": _manifest(args, args.seed, t0), "report": rep.to_dict()}, "simulate")
    return EXIT_OK


# ------------------------------------------------------------- gammaq


def cmd_gammaq(args) -> int:
    t0 = time.perf_counter()
    q = parse_q(args.q)
    cfg = quad_config(args)
    if args.t:
        ts = parse_vector(args.t)
    else:
        ts = np.linspace(0.0, args.t_max, args.points)
    values = []
    status = EXIT_OK
    for t in ts:
        try:
            v, e = specfun.gamma_q_with_error(q, float(t), cfg)
        except NonConvergenceError as exc:
            v, e, status = exc.estimate, exc.error, EXIT_NUMERIC
        values.append({"t": float(t), "value": v, "err": e})
    moments = []
    for a in parse_vector(args.moments) if args.moments else []:
        moments.append({"alpha": float(a), "value": specfun.stable_moment(q, float(a))})
    doc = {"manifest": _manifest(args, None, t0), "q": q, "values": values, "moments": moments}
    emit(doc, "gammaq")
    return status


# ----------------------------------------------------------- selftest


def cmd_selftest(args) -> int:
    t0 = time.perf_counter()
    if args.inject_fault:
        specfun.set_fault(args.inject_fault, 1.0 + 1e-3)
    only = args.only.split(",") if args.only else None
    try:
        def progress(r):
            print(f"[{'PASS' if r.passed else 'FAIL'}] {r.id:>2} {r.name}", file=sys.stderr, flush=True)

        results = acceptance.run_all(args.quick, only, progress)
    finally:
        specfun.set_fault(args.inject_fault or "gamma", None)
    doc = dict(acceptance.summary(results, args.quick, args.timing), manifest=_manifest(args, None, t0))
    emit(doc, "selftest")
    failed = [f"{r.id} ({r.name})" for r in results if not r.passed]
    if failed:
        print("failed criteria: " + ", ".join(failed), file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


# -------------------------------------------------------------- parser


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help=f"key=value file overriding defaults (default from ${CONFIG_ENV})")
    p.add_argument("--timing", action="store_true", help="record wall time in the manifest")


def _add_space(p: argparse.ArgumentParser, spectral: bool = True) -> None:
    p.add_argument("--space", default="linf", help="linf, lq, l<q> (e.g. l1, l3)" + (", or spectral" if spectral else ""))
    p.add_argument("--n", type=int)
    p.add_argument("--q", help="norm exponent for --space lq (number or inf)")
    if spectral:
        p.add_argument("--r", type=float, help="exponent of a spectral space")
        p.add_argument("--spectral-file", help="atoms CSV for --space spectral")


def _add_scan(p: argparse.ArgumentParser) -> None:
    p.add_argument("--grid", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--floor", type=float)
    p.add_argument("--decision-tol", type=float)
    p.add_argument("--rel-tol", type=float)
    p.add_argument("--abs-tol", type=float)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="negembed", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"negembed {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("transform", help="Fourier transform of ||x||^-p at a point")
    _add_common(p)
    _add_space(p)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--xi", required=True, help="comma-separated coordinates")
    p.add_argument("--method", default="all", choices=["closed", "quad", "lq", "lq-via-linf", "sphere", "all"])
    p.add_argument("--rel-tol", type=float)
    p.add_argument("--abs-tol", type=float)
    p.add_argument("--mc-samples", type=int)
    p.add_argument("--sphere-rel-tol", type=float)
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("signscan", help="scan the transform for sign changes")
    _add_common(p)
    _add_space(p)
    p.add_argument("--p", type=float, required=True)
    _add_scan(p)
    p.add_argument("--dump-grid", help="write scanned points and values as CSV")
    p.set_defaults(func=cmd_signscan)

    p = sub.add_parser("certify", help="moment certificate of a sign change")
    _add_common(p)
    p.add_argument("--q", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=float, required=True)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("critical", help="bisect for the critical exponent")
    _add_common(p)
    _add_space(p, spectral=False)
    _add_scan(p)
    p.add_argument("--width", type=float, default=0.05)
    p.set_defaults(func=cmd_critical)

    p = sub.add_parser("simulate", help="compare E||X||^p with its block-decoupled counterpart")
    _add_common(p)
    p.add_argument("--space", default="linf", help="linf, lq, l<q>")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--norm-q", help="norm exponent for --space lq")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--q", type=float, required=True, help="stability index in (0, 2]")
    p.add_argument("--p", type=float, required=True, help="signed moment exponent")
    p.add_argument("--atoms", default="coupled", choices=sorted(stablesim.ATOM_PRESETS))
    p.add_argument("--atoms-file")
    p.add_argument("--N", type=int, default=200_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--estimator", default="auto", choices=["auto", "mean", "median_of_means"])
    p.add_argument("--partitions", type=int, default=1)
    p.add_argument("--dump-samples", help="write X and Y draws as CSV")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("gammaq", help="tabulate gamma_q and stable moments")
    _add_common(p)
    p.add_argument("--q", required=True)
    p.add_argument("--t", help="comma-separated arguments")
    p.add_argument("--t-max", type=float, default=20.0)
    p.add_argument("--points", type=int, default=41)
    p.add_argument("--moments", help="comma-separated moment orders")
    p.add_argument("--rel-tol", type=float)
    p.add_argument("--abs-tol", type=float)
    p.set_defaults(func=cmd_gammaq)

    p = sub.add_parser("selftest", help="run the acceptance suite")
    _add_common(p)
    p.add_argument("--quick", action="store_true")
    p.add_argument("--only", help="comma-separated criterion ids")
    p.add_argument("--inject-fault", choices=["gamma"], help="perturb a special function to test failure reporting")
    p.set_defaults(func=cmd_selftest)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except NonConvergenceError as exc:
        print(f"error: {exc} (estimate {exc.estimate:.17g}, bound {exc.error:.3g})", file=sys.stderr)
        return EXIT_NUMERIC
    except (NegembedError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
