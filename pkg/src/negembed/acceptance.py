"""Acceptance suite: thirteen numbered criteria with pinned tolerances.

Each check returns ``(passed, detail)``; ``detail`` holds only deterministic
numbers so that two runs produce identical summaries.  ``quick`` shrinks
sample counts and scan densities but keeps every tolerance.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import embedcheck, jsonio, negft, specfun, stablesim
from .config import NonConvergenceError, QuadratureConfig, ScanConfig
from .negft import LqNorm, SpectralSubspace


@dataclass
class CriterionResult:
    id: str
    name: str
    passed: bool
    detail: dict
    seconds: float

    def to_dict(self) -> dict:
        return {"id": self.id, "name": self.name, "passed": self.passed, "detail": self.detail}


def _rng(tag: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(20240611, spawn_key=(tag,))))


# ------------------------------------------------------------------ 1


def special_function_oracles(quick: bool = False):
    t = np.linspace(0.0, 20.0, 41)
    e1 = max(abs(specfun.gamma_q(1, x) / (2 / (1 + x * x)) - 1) for x in t)
    e2 = max(abs(specfun.gamma_q(2, x) / (specfun.SQRT_PI * math.exp(-x * x / 4)) - 1) for x in t)
    sm = specfun.stable_moment(2, 1)
    e3 = abs(sm / (4 * specfun.SQRT_PI) - 1)
    mismatches, checked = [], 0
    for q in (2.5, 3.0, 4.7, 8.0):
        for a in (-0.5, 0.7, 1.9, 2.1, 2.9):
            if a >= q:
                continue  # outside the moment's domain
            want = 1.0 if a < 2 else -1.0
            checked += 1
            if math.copysign(1.0, specfun.stable_moment(q, a)) != want:
                mismatches.append([q, a])
    ok = e1 <= 1e-8 and e2 <= 1e-8 and e3 <= 1e-10 and not mismatches
    return ok, {
        "gamma_q1_max_rel_err": e1,
        "gamma_q2_max_rel_err": e2,
        "moment_rel_err": e3,
        "sign_cells_checked": checked,
        "sign_mismatches": mismatches,
    }


# ------------------------------------------------------------------ 2


def closed_vs_quadrature(quick: bool = False):
    rng = _rng(2)
    cases = 20 if quick else 100
    need = cases - 1
    agree = retried = 0
    worst = 0.0
    failures = []
    cfg = QuadratureConfig()
    for _ in range(cases):
        n = int(rng.integers(2, 6))
        p = float(rng.uniform(0.2, n - 0.2))
        if p.is_integer():
            p += 1e-3
        xi = rng.uniform(0.2, 3.0, n)
        c = negft.ft_linf_closed(p, xi)
        q = negft.ft_linf_quadrature(p, xi, cfg)
        ratio = abs(c.value - q.value) / (c.err_estimate + q.err_estimate)
        if ratio > 1:
            retried += 1
            q = negft.ft_linf_quadrature(p, xi, cfg.tightened())
            ratio = abs(c.value - q.value) / (c.err_estimate + q.err_estimate)
        worst = max(worst, ratio)
        if ratio <= 1:
            agree += 1
        else:
            failures.append({"n": n, "p": p, "xi": xi.tolist(), "ratio": ratio})
    return agree >= need, {
        "cases": cases,
        "agree": agree,
        "required": need,
        "retried": retried,
        "worst_delta_over_err": worst,
        "failures": failures[:5],
    }


# ------------------------------------------------------------------ 3


def riesz_oracle(quick: bool = False):
    rng = _rng(3)
    cases = 6 if quick else 20
    worst = 0.0
    for _ in range(cases):
        n = int(rng.integers(2, 5))
        p = float(rng.uniform(0.1, n - 0.1))
        xi = rng.uniform(0.2, 3.0, n)
        got = negft.ft_lq_quadrature(2.0, p, xi).value
        ref = negft.riesz_transform(p, xi)
        worst = max(worst, abs(got / ref - 1))
    return worst <= 1e-6, {"cases": cases, "max_rel_err": worst}


# ------------------------------------------------------------------ 4


def mc_reduction(quick: bool = False):
    rng = _rng(4)
    cases = 3 if quick else 5
    cfg = QuadratureConfig(mc_samples=200_000 if quick else 1_000_000)
    rows = []
    ok = True
    for _ in range(cases):
        p = float(rng.uniform(0.2, 2.8))
        xi = rng.uniform(0.5, 2.0, 3)
        quad = negft.ft_lq_quadrature(3.0, p, xi)
        mc = negft.ft_lq_via_linf(3.0, p, xi, cfg)
        se = mc.err_estimate / 3
        z = abs(mc.value - quad.value) / se
        rows.append({"p": p, "quad": quad.value, "mc": mc.value, "se": se, "z": z})
        ok &= abs(mc.value - quad.value) <= mc.err_estimate + quad.err_estimate
    return ok, {"cases": rows, "samples": cfg.mc_samples}


# ------------------------------------------------------------------ 5


def sign_tables(quick: bool = False):
    rng = _rng(5)
    npts = 1000
    cells = []
    ok = True
    for n in (2, 3, 4, 5):
        pts = rng.uniform(0.0, 1.0, (npts, n)) + 1e-3
        odd = n % 2 == 1
        for p, want in [(n - 2 + d, 1) for d in (0.25, 0.75, 1.25, 1.75)] + [
            (n - 3 + d, -1) for d in (0.25, 0.75)
        ]:
            vals, errs = negft.sign_sum_batch(p, pts, odd)
            good = int(np.sum(want * vals > errs))
            ok &= good == npts
            cells.append({"n": n, "p": p, "sign": want, "strict": good})
    witnesses = []
    scfg = ScanConfig(grid=5 if quick else 7, samples=16 if quick else 64)
    for n, p in ((4, 0.5), (5, 0.5), (5, 1.5)):
        rep = embedcheck.sign_scan(LqNorm(math.inf, n), p, scfg)
        witnesses.append({"n": n, "p": p, "verdict": rep.verdict})
        ok &= rep.verdict == "SignChange"
    return ok, {"points": npts, "cells": cells, "witnesses": witnesses}


# ------------------------------------------------------------------ 6


def boundary(quick: bool = False):
    scfg = ScanConfig(grid=5, samples=16) if quick else ScanConfig()
    r4 = embedcheck.critical_exponent(LqNorm(math.inf, 4), scfg)
    r35 = embedcheck.critical_exponent(LqNorm(3.0, 5), scfg)
    r3 = embedcheck.critical_exponent(LqNorm(math.inf, 3), scfg)
    ok = (
        r4.transition and abs(r4.estimate - 1.0) <= 0.05
        and r35.transition and abs(r35.estimate - 2.0) <= 0.05
        and not r3.transition
    )
    return ok, {
        "linf4": {"estimate": r4.estimate, "bracket": [r4.lower, r4.upper]},
        "l3_5": {"estimate": r35.estimate, "bracket": [r35.lower, r35.upper]},
        "linf3_transition": r3.transition,
    }


# ------------------------------------------------------------------ 7


def random_spectral(rng: np.random.Generator, n: int = 3) -> SpectralSubspace:
    while True:
        m = int(rng.integers(n, n + 4))
        atoms = rng.standard_normal((n, m))
        if np.linalg.matrix_rank(atoms) == n and np.linalg.cond(atoms @ atoms.T) < 1e3:
            return SpectralSubspace(atoms, float(rng.uniform(0.5, 2.0)))


def sphere_route(quick: bool = False):
    rng = _rng(7)
    spaces = 3 if quick else 10
    worst = math.inf
    rows = []
    ok = True
    for _ in range(spaces):
        sp = random_spectral(rng)
        xi = rng.standard_normal(3)
        for p in (2.0, 2.5, 2.9):
            r = negft.ft_sphere(sp, p, xi)
            rows.append({"p": p, "value": r.value, "err": r.err_estimate})
            ok &= r.value >= -r.err_estimate
            worst = min(worst, r.value)
    xi = np.array([1.0, 0.5, 2.0])
    s = negft.ft_sphere(LqNorm(math.inf, 3), 2.3, xi)
    c = negft.ft_linf_closed(2.3, xi)
    rel = abs(s.value / c.value - 1)
    ok &= rel <= 1e-4
    return ok, {"evaluations": len(rows), "min_value": worst, "linf_rel_err": rel}


# ------------------------------------------------------------------ 8


def certificates(quick: bool = False):
    rows = []
    ok = True
    for q, n, p in ((3, 5, 0.5), (4.5, 6, 1.0), (8, 5, 1.5)):
        c = embedcheck.sign_change_certificate(q, n, p)
        rows.append({"q": q, "n": n, "p": p, "I_pos": c.I_pos, "I_neg": c.I_neg})
        ok &= c.I_pos > 0 > c.I_neg
    return ok, {"cases": rows}


# ------------------------------------------------------------------ 9


def stable_law(quick: bool = False):
    N = 200_000 if quick else 1_000_000
    bound = 3 / math.sqrt(N)
    worst = 0.0
    ok = True
    for i, q in enumerate((0.8, 1.0, 1.5, 2.0)):
        x = stablesim.sample_standard_stable(q, stablesim.stream(9, i), N)
        for t in (0.5, 1.0, 2.0):
            d = abs(float(np.mean(np.cos(t * x))) - math.exp(-(t**q)))
            worst = max(worst, d)
            ok &= d <= bound
    return ok, {"N": N, "bound": bound, "max_abs_dev": worst}


# ------------------------------------------------------------ 10, 11


def _discipline(configs, N: int, rerun_N: int, allowed_inconclusive: int):
    """All must hold; up to ``allowed_inconclusive`` may be rerun at ``rerun_N``."""
    rows = []
    inconclusive = 0
    ok = True
    for label, space, q, n, k, p in configs:
        spec = stablesim.StableSpec(q, stablesim.coupled_atoms(n), k)
        r = stablesim.correlation_experiment(space, spec, p, N, 42)
        row = {
            "config": label, "E_X": r.E_X, "ci_X": r.ci_X, "E_Y": r.E_Y, "ci_Y": r.ci_Y,
            "direction": r.direction, "estimator": r.estimator, "verdict": r.verdict,
        }
        if r.verdict == "Inconclusive":
            inconclusive += 1
            r2 = stablesim.correlation_experiment(space, spec, p, rerun_N, 42)
            row["rerun"] = {"N": rerun_N, "E_X": r2.E_X, "E_Y": r2.E_Y, "verdict": r2.verdict}
            ok &= r2.verdict == "InequalityHolds"
        else:
            ok &= r.verdict == "InequalityHolds"
        rows.append(row)
    ok &= inconclusive <= allowed_inconclusive
    return ok, rows


def negative_moment_correlation(quick: bool = False):
    configs = [
        (f"{name} q={q:g}", space, q, 4, 2, -1.5)
        for name, space in (("linf4", LqNorm(math.inf, 4)), ("l3_4", LqNorm(3.0, 4)))
        for q in (1.5, 2.0)
    ]
    ok, rows = _discipline(configs, 200_000, 1_000_000, 1)
    return ok, {"N": 200_000, "configs": rows}


def positive_moment_extremes(quick: bool = False):
    configs = [
        ("l1_3 p=1", LqNorm(1.0, 3), 2.0, 3, 1, 1.0),
        ("l2_3 p=3", LqNorm(2.0, 3), 2.0, 3, 1, 3.0),
    ]
    ok, rows = _discipline(configs, 200_000, 1_000_000, 1)
    # a non-degenerate instance of the same direction, reported alongside
    spec = stablesim.StableSpec(2.0, stablesim.coupled_atoms(3), 1)
    extra = stablesim.correlation_experiment(LqNorm(2.0, 3), spec, 1.0, 200_000, 42)
    return ok, {
        "N": 200_000,
        "configs": rows,
        "supplementary_l2_3_p1": {"E_X": extra.E_X, "E_Y": extra.E_Y, "verdict": extra.verdict},
    }


# ------------------------------------------------------------------ 12


def clarkson_suite(quick: bool = False):
    rng = _rng(12)
    fails = 0
    for _ in range(10_000):
        m = int(rng.integers(1, 9))
        x, y = rng.standard_normal(m), rng.standard_normal(m)
        q = float(rng.uniform(0.05, 2.0))
        p = float(rng.uniform(0.01, 1.0)) * q
        fails += not all(stablesim.clarkson_check(x, y, q, p))
    rev_fails = 0
    for _ in range(1000):
        m = int(rng.integers(1, 9))
        x, y = rng.standard_normal(m), rng.standard_normal(m)
        p = float(rng.uniform(2.0, 6.0)) + 1e-9
        rev_fails += not stablesim.clarkson_check(x, y, 2.0, p)[1]
    return fails == 0 and rev_fails == 0, {"cases": 10_000, "failures": fails, "reversed_cases": 1000, "reversed_failures": rev_fails}


# ------------------------------------------------------------------ 13


def _determinism_payload() -> str:
    scfg = ScanConfig(grid=4, samples=8, seed=3)
    scan = embedcheck.sign_scan(LqNorm(3.0, 4), 0.5, scfg).to_dict()
    spec = stablesim.StableSpec(1.5, stablesim.coupled_atoms(4), 2)
    sim = stablesim.correlation_experiment(LqNorm(math.inf, 4), spec, -1.5, 20_000, 7, partitions=3).to_dict()
    mc = negft.ft_lq_via_linf(3.0, 1.5, (1.0, 1.0, 2.0), QuadratureConfig(mc_samples=20_000)).to_dict()
    return jsonio.dumps({"scan": scan, "sim": sim, "mc": mc})


def determinism(quick: bool = False):
    a, b = _determinism_payload(), _determinism_payload()
    return a == b, {"bytes": len(a), "identical": a == b}


CRITERIA: list[tuple[str, str, Callable, float]] = [
    ("1", "special-function oracles", special_function_oracles, 5),
    ("2", "closed form vs oscillatory quadrature", closed_vs_quadrature, 120),
    ("3", "Gaussian-kernel oracle", riesz_oracle, 60),
    ("4", "Monte Carlo reduction consistency", mc_reduction, 120),
    ("5", "sign-sum tables and witnesses", sign_tables, 60),
    ("6", "critical exponent boundary", boundary, 600),
    ("7", "sphere route nonnegativity", sphere_route, 120),
    ("8", "moment sign-change certificate", certificates, 1),
    ("9", "stable law pinning", stable_law, 60),
    ("10", "negative-moment correlation", negative_moment_correlation, 300),
    ("11", "positive-moment extremality", positive_moment_extremes, 180),
    ("12", "Clarkson-type inequalities", clarkson_suite, 10),
    ("13", "report determinism", determinism, 60),
]


def run_criterion(cid: str, quick: bool = False) -> CriterionResult:
    for i, name, fn, budget in CRITERIA:
        if i == cid:
            t0 = time.perf_counter()
            try:
                ok, detail = fn(quick)
            except (ArithmeticError, ValueError, NonConvergenceError) as exc:
                ok, detail = False, {"exception": f"{type(exc).__name__}: {exc}"}
            dt = time.perf_counter() - t0
            if not quick and dt > budget:
                ok = False
                detail = dict(detail, over_budget=True)
            return CriterionResult(i, name, bool(ok), detail, dt)
    raise KeyError(cid)


def run_all(quick: bool = False, only: list[str] | None = None, progress: Callable | None = None):
    results = []
    for cid, *_ in CRITERIA:
        if only and cid not in only:
            continue
        r = run_criterion(cid, quick)
        if progress:
            progress(r)
        results.append(r)
    return results


def summary(results, quick: bool, timing: bool = False) -> dict:
    out = {
        "quick": quick,
        "passed": all(r.passed for r in results),
        "criteria": [r.to_dict() for r in results],
    }
    if timing:
        for d, r in zip(out["criteria"], results):
            d["seconds"] = r.seconds
    return out
