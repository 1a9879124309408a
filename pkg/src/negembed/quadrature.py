"""Vectorized adaptive quadrature.

Panels are integrated with a 21-point Gauss-Legendre rule; the 10-point rule on
the same panel supplies the error estimate, so reported errors bound the cruder
rule and are conservative for the returned value.  Integrands are vectorized
callables and may return several components (shape ``(k, npts)``); adaptivity is
driven by component 0 and every component is integrated on the final mesh.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import roots_jacobi

from .config import NonConvergenceError

EPS = np.finfo(float).eps

_XH, _WH = leggauss(21)
_XL, _WL = leggauss(10)
_NODES = np.concatenate([_XH, _XL])


@dataclass(frozen=True)
class QuadResult:
    value: np.ndarray | float
    error: float
    panels: int
    abs_integral: float

    @property
    def scalar(self) -> float:
        return float(np.atleast_1d(self.value)[0])


def _eval_panels(f: Callable, a: np.ndarray, b: np.ndarray):
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    t = mid[:, None] + half[:, None] * _NODES[None, :]
    vals = np.asarray(f(t.ravel()), dtype=float)
    squeeze = vals.ndim == 1
    vals = vals.reshape((1 if squeeze else vals.shape[0], a.size, _NODES.size))
    hi = vals[..., :21] @ _WH * half
    lo = vals[..., 21:] @ _WL * half
    ab = np.abs(vals[0, :, :21]) @ _WH * half
    return hi, np.abs(hi[0] - lo[0]), ab, squeeze


def adaptive(
    f: Callable[[np.ndarray], np.ndarray],
    breakpoints,
    rel_tol: float = 1e-10,
    abs_tol: float = 1e-14,
    max_panels: int = 200_000,
) -> QuadResult:
    """Integrate ``f`` over ``[breakpoints[0], breakpoints[-1]]``.

    Every interval between consecutive breakpoints starts as its own panel.
    Raises ``NonConvergenceError`` (carrying the best estimate) when the panel
    budget is exhausted.
    """
    edges = np.asarray(breakpoints, dtype=float)
    if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
        raise ValueError("breakpoints must be strictly increasing")
    a, b = edges[:-1].copy(), edges[1:].copy()
    est, err, ab, squeeze = _eval_panels(f, a, b)
    done_val = np.zeros(est.shape[0])
    done_err = 0.0
    done_abs = 0.0
    while True:
        total = done_val + est.sum(axis=1)
        err_sum = done_err + err.sum()
        abs_sum = done_abs + ab.sum()
        roundoff = 50 * EPS * abs_sum
        tol = max(abs_tol, rel_tol * abs(total[0]), roundoff)
        if err_sum <= tol:
            break
        order = np.argsort(err)[::-1]
        remaining = err_sum - np.cumsum(err[order])
        nsplit = int(np.searchsorted(-remaining, -0.5 * tol)) + 1
        pick = order[: max(1, min(nsplit, order.size))]
        # panels too narrow to split are frozen with their current error
        narrow = (b[pick] - a[pick]) <= 64 * EPS * np.maximum(np.abs(a[pick]), np.abs(b[pick]))
        if np.any(narrow):
            frozen = pick[narrow]
            done_val += est[:, frozen].sum(axis=1)
            done_err += err[frozen].sum()
            done_abs += ab[frozen].sum()
            keep = np.ones(a.size, bool)
            keep[frozen] = False
            pick = pick[~narrow]
            remap = np.cumsum(keep) - 1
            pick = remap[pick]
            a, b, est, err, ab = a[keep], b[keep], est[:, keep], err[keep], ab[keep]
            if pick.size == 0:
                if a.size == 0:
                    break
                continue
        if a.size + pick.size > max_panels:
            raise NonConvergenceError(
                f"adaptive quadrature exceeded {max_panels} panels",
                estimate=float(total[0]),
                error=float(err_sum + roundoff),
            )
        mid = 0.5 * (a[pick] + b[pick])
        na = np.concatenate([a[pick], mid])
        nb = np.concatenate([mid, b[pick]])
        e2, r2, a2, _ = _eval_panels(f, na, nb)
        keep = np.ones(a.size, bool)
        keep[pick] = False
        a = np.concatenate([a[keep], na])
        b = np.concatenate([b[keep], nb])
        est = np.concatenate([est[:, keep], e2], axis=1)
        err = np.concatenate([err[keep], r2])
        ab = np.concatenate([ab[keep], a2])
    total = done_val + est.sum(axis=1)
    abs_sum = done_abs + ab.sum()
    error = done_err + err.sum() + 50 * EPS * abs_sum
    value = float(total[0]) if squeeze else total
    return QuadResult(value, float(error), int(a.size), float(abs_sum))


@lru_cache(maxsize=256)
def _jacobi_rule(m: int, beta: float):
    x, w = roots_jacobi(m, 0.0, beta)
    return x, w


def power_panel(f: Callable[[np.ndarray], np.ndarray], a: float, s: float, m: int = 24):
    """``int_0^a t**s f(t) dt`` for smooth ``f`` and ``s > -1`` by Gauss-Jacobi.

    Returns ``(value, error, abs_integral)``; the error compares ``m`` and
    ``2m`` node rules.  ``f`` may return several components like ``adaptive``.
    """
    out = []
    for k in (m, 2 * m):
        x, w = _jacobi_rule(k, float(s))
        t = 0.5 * a * (1.0 + x)
        vals = np.asarray(f(t), dtype=float)
        scale = (0.5 * a) ** (s + 1.0)
        out.append((vals @ w * scale, np.abs(np.atleast_2d(vals)[0]) @ w * scale))
    (lo, _), (hi, ab) = out
    err = float(abs(np.atleast_1d(hi)[0] - np.atleast_1d(lo)[0]))
    return hi, err, float(ab)


def gauss_legendre_grid(edges: np.ndarray, order: int = 10):
    """Composite Gauss-Legendre nodes/weights on the panels given by ``edges``."""
    x, w = leggauss(order)
    a, b = edges[:-1, None], edges[1:, None]
    nodes = (0.5 * (b - a) * x + 0.5 * (a + b)).ravel()
    weights = (0.5 * (b - a) * w).ravel()
    return nodes, weights
