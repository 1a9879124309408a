"""Embedding verdicts from transform signs.

A norm power ``||x||**-p`` is positive definite exactly when its Fourier
transform is nonnegative, so a numerical scan of the transform either finds
points of both signs (a sign change) or finds nothing below the noise band.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import negft, specfun
from .config import (
    DomainError,
    InfeasibleCertificateError,
    NonConvergenceError,
    QuadratureConfig,
    ScanConfig,
)
from .negft import LqNorm, SpaceSpec, SpectralSubspace

VERDICTS = ("AllNonnegative", "SignChange", "Inconclusive")
CONTINUITY_SHIFT = 1e-3


@dataclass
class SignScanReport:
    space: dict
    p: float
    evaluated_p: float
    by_continuity: bool
    method: str
    n_samples: int
    min_value: float
    argmin: list
    max_value: float
    argmax: list
    decision_tol: float
    max_err: float
    verdict: str
    pos_witness: list | None = None
    pos_value: float | None = None
    neg_witness: list | None = None
    neg_value: float | None = None
    failures: int = 0
    points: np.ndarray = field(default=None, repr=False)
    values: np.ndarray = field(default=None, repr=False)
    errors: np.ndarray = field(default=None, repr=False)

    def to_dict(self) -> dict:
        out = {k: v for k, v in self.__dict__.items() if k not in ("points", "values", "errors")}
        return out


@dataclass(frozen=True)
class CertificateReport:
    q: float
    n: int
    p: float
    eps: float
    alpha_pos: tuple
    alpha_neg: tuple
    target_pos: float
    target_neg: float
    I_pos: float
    I_neg: float

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["alpha_pos"] = list(self.alpha_pos)
        d["alpha_neg"] = list(self.alpha_neg)
        return d


@dataclass
class CriticalReport:
    space: dict
    estimate: float
    lower: float
    upper: float
    transition: bool
    widened: bool
    steps: list

    def to_dict(self) -> dict:
        return dict(self.__dict__)


# ------------------------------------------------------------------- points


def scan_points(n: int, cfg: ScanConfig, symmetric: bool = True) -> np.ndarray:
    """Deterministic scan directions on the unit sphere.

    For coordinate-symmetric spaces the grid is every multiset of ``cfg.grid``
    log-spaced levels in ``[floor, 1]`` (sorted, so permutations are skipped),
    normalized and clamped to the floor, followed by ``cfg.samples`` seeded
    random points of the positive orthant.  Other spaces get random directions
    on the half-sphere ``xi_n >= 0`` plus the coordinate axes.
    """
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(cfg.seed)))
    if symmetric:
        levels = np.geomspace(cfg.floor, 1.0, cfg.grid)
        grid = np.array(list(itertools.combinations_with_replacement(levels, n)))
        rand = np.abs(rng.standard_normal((cfg.samples, n)))
        pts = np.vstack([grid, rand]) if cfg.samples else grid
        pts = pts / np.linalg.norm(pts, axis=1, keepdims=True)
        return np.maximum(pts, cfg.floor)
    rand = rng.standard_normal((cfg.samples, n))
    rand[rand[:, -1] < 0] *= -1
    pts = np.vstack([np.eye(n), rand])
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


# -------------------------------------------------------------- evaluation


def _evaluator(space: SpaceSpec, p: float, qcfg: QuadratureConfig):
    """Pick a transform route; returns (method, evaluated_p, by_continuity, batch_fn)."""
    n = space.n
    if not 0 < p < n:
        raise DomainError(f"need 0 < p < n={n}, got {p}")
    if isinstance(space, SpectralSubspace):
        if p < n - 1:
            raise DomainError("no transform route for general spaces with p < n-1")

        def sphere(X):
            out = [negft.ft_sphere(space, p, x, qcfg) for x in X]
            return np.array([o.value for o in out]), np.array([o.err_estimate for o in out])

        return "sphere", p, False, sphere
    q = space.q
    pe, cont = p, False
    if float(p).is_integer() and q > 2 and p >= n - 3:
        pe, cont = p + CONTINUITY_SHIFT, True
    if space.is_max and not float(pe).is_integer():
        return "closed", pe, cont, lambda X: negft.ft_linf_closed_batch(pe, X)

    def one(x):
        if space.is_max:
            return negft.ft_linf_quadrature(pe, x, qcfg)
        return negft.ft_lq_quadrature(q, pe, x, qcfg)

    def batch(X):
        vals, errs = np.empty(len(X)), np.empty(len(X))
        for i, x in enumerate(X):
            try:
                r = one(x)
                vals[i], errs[i] = r.value, r.err_estimate
            except NonConvergenceError as exc:
                vals[i], errs[i] = exc.estimate, max(exc.error, abs(exc.estimate))
        return vals, errs

    return ("quad_linf" if space.is_max else "quad_lq"), pe, cont, batch


def evaluate_transform(space: SpaceSpec, p: float, xi, qcfg: QuadratureConfig | None = None) -> negft.TransformValue:
    """Evaluate with the same route a scan would use."""
    qcfg = qcfg or QuadratureConfig()
    method, _, _, fn = _evaluator(space, float(p), qcfg)
    v, e = fn(np.atleast_2d(np.asarray(xi, dtype=float)))
    return negft.TransformValue(v[0], e[0], method)


def sign_scan(space: SpaceSpec, p: float, cfg: ScanConfig | None = None) -> SignScanReport:
    """Scan the transform for sign changes; deterministic given ``cfg.seed``."""
    cfg = cfg or ScanConfig()
    p = float(p)
    method, pe, cont, fn = _evaluator(space, p, cfg.quad)
    pts = scan_points(space.n, cfg, symmetric=isinstance(space, LqNorm))
    vals, errs = fn(pts)
    bad = ~np.isfinite(vals) | ~np.isfinite(errs)
    failures = int(bad.sum())
    errs = np.where(bad, np.inf, errs)
    vals = np.where(bad, 0.0, vals)
    finite_err = errs[np.isfinite(errs)]
    if cfg.decision_tol is not None:
        tol = float(cfg.decision_tol)
    else:
        tol = max(1e-7, 10.0 * float(np.median(finite_err))) if finite_err.size else 1e-7
    band = tol + errs
    imin, imax = int(np.argmin(vals)), int(np.argmax(vals))
    neg_margin = -vals - band
    pos_margin = vals - band
    neg_ok = neg_margin > 0
    pos_ok = pos_margin > 0
    max_err = float(finite_err.max()) if finite_err.size else math.inf
    report = SignScanReport(
        space=space.describe(),
        p=p,
        evaluated_p=pe,
        by_continuity=cont,
        method=method,
        n_samples=int(len(pts)),
        min_value=float(vals[imin]),
        argmin=pts[imin].tolist(),
        max_value=float(vals[imax]),
        argmax=pts[imax].tolist(),
        decision_tol=tol,
        max_err=max_err,
        verdict="Inconclusive",
        failures=failures,
        points=pts,
        values=vals,
        errors=errs,
    )
    if neg_ok.any() and pos_ok.any():
        ineg = int(np.argmax(np.where(neg_ok, neg_margin, -np.inf)))
        ipos = int(np.argmax(np.where(pos_ok, pos_margin, -np.inf)))
        report.verdict = "SignChange"
        report.neg_witness, report.neg_value = pts[ineg].tolist(), float(vals[ineg])
        report.pos_witness, report.pos_value = pts[ipos].tolist(), float(vals[ipos])
    elif pos_ok.any() and report.min_value >= -(tol + max_err) and failures == 0:
        report.verdict = "AllNonnegative"
        ipos = int(np.argmax(np.where(pos_ok, pos_margin, -np.inf)))
        report.pos_witness, report.pos_value = pts[ipos].tolist(), float(vals[ipos])
    return report


# ------------------------------------------------------------- certificate


def sign_change_certificate(q: float, n: int, p: float) -> CertificateReport:
    """Two moment products of opposite sign proving ``||x||_q**-p`` is not positive definite.

    With equal ``alpha_i = (-p - target)/(n-1)`` the product
    ``S_q(alpha)**(n-1) * S_q(target)`` changes sign as ``target`` crosses 2,
    because ``S_q`` does.  Targets are ``2 -+ eps``.
    """
    q, p = float(q), float(p)
    if int(n) != n:
        raise DomainError("n must be an integer")
    n = int(n)
    if not (q > 2 and n > 3 and 0 < p < n - 3):
        raise InfeasibleCertificateError(
            f"no certificate: need q > 2, n > 3, 0 < p < n-3 (got q={q:g}, n={n}, p={p:g})"
        )
    eps = min(0.1, 0.5 * (n - 3 - p), 0.5 * (q - 2))
    hi_t = min(n - 1 - p, q)
    out = {}
    for target in (2 - eps, 2 + eps):
        if not (max(-p, -1.0) < target < hi_t):
            raise InfeasibleCertificateError(f"target {target:g} outside the admissible interval")
        a = (-p - target) / (n - 1)
        if not -1 < a < 0:
            raise InfeasibleCertificateError(f"equal split alpha={a:g} outside (-1, 0)")
        val = specfun.stable_moment(q, a) ** (n - 1) * specfun.stable_moment(q, target)
        out[target] = (a, val)
    (t1, (a1, v1)), (t2, (a2, v2)) = out.items()
    if v1 * v2 >= 0:
        raise InfeasibleCertificateError("moment products do not change sign")
    if v1 < 0:
        (t1, a1, v1), (t2, a2, v2) = (t2, a2, v2), (t1, a1, v1)
    return CertificateReport(
        q=q, n=n, p=p, eps=eps,
        alpha_pos=(a1,) * (n - 1), alpha_neg=(a2,) * (n - 1),
        target_pos=t1, target_neg=t2, I_pos=v1, I_neg=v2,
    )


# -------------------------------------------------------- critical exponent


def critical_exponent(space: LqNorm, cfg: ScanConfig | None = None, width: float = 0.05) -> CriticalReport:
    """Bisect on p for the boundary between sign-changing and nonnegative transforms.

    A single transition is assumed.  Inconclusive midpoints are retried at the
    quarter points; if those are inconclusive too the bracket is left wide and
    ``widened`` is set.
    """
    cfg = cfg or ScanConfig()
    if not isinstance(space, LqNorm) or space.q <= 2 or space.n < 3:
        raise DomainError("critical_exponent needs l_q with q > 2 and n >= 3")
    n = space.n
    lo, hi = 0.05, n - 0.05
    steps = []

    def verdict(p):
        v = sign_scan(space, p, cfg).verdict
        steps.append({"p": p, "verdict": v})
        return v

    if verdict(lo) != "SignChange":
        return CriticalReport(space.describe(), lo, lo, lo, False, False, steps)
    if verdict(hi) == "SignChange":
        return CriticalReport(space.describe(), hi, hi, hi, False, False, steps)
    widened = False
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        v = verdict(mid)
        if v == "Inconclusive":
            quarter = 0.25 * (hi - lo)
            for alt in (mid - quarter, mid + quarter):
                v2 = verdict(alt)
                if v2 != "Inconclusive":
                    mid, v = alt, v2
                    break
        if v == "SignChange":
            lo = mid
        elif v == "AllNonnegative":
            hi = mid
        else:
            widened = True
            break
    return CriticalReport(space.describe(), 0.5 * (lo + hi), lo, hi, True, widened, steps)
