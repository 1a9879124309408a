"""Real special functions: gamma, the Fourier constant c_p, stable moments and gamma_q.

``gamma_q(q, t)`` is the Fourier transform of ``exp(-|z|**q)``,
``2 * int_0^inf cos(t z) exp(-z**q) dz``.  For q >= 1 and large ``t`` it has the
asymptotic expansion ``sum_j (-1)**j / j! * c_p(j q) * t**(-1 - j q)``, whose
leading coefficient is the Polya constant ``2 Gamma(q+1) sin(pi q / 2)``; for
even integer q every coefficient vanishes and the decay is exponential.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicHermiteSpline
from scipy.special import gammaincc

from . import quadrature
from .config import DomainError, NonConvergenceError, PoleError, QuadratureConfig

SQRT_PI = math.sqrt(math.pi)
Q_MIN = 0.5

# fault injection for the self-test harness; see cli selftest --inject-fault
_FAULTS: dict[str, float] = {}


def set_fault(name: str, scale: float | None) -> None:
    if scale is None:
        _FAULTS.pop(name, None)
    else:
        _FAULTS[name] = scale


def _is_nonpositive_integer(x: float) -> bool:
    return x <= 0 and float(x).is_integer()


def _is_even_integer(x: float) -> bool:
    return float(x).is_integer() and int(x) % 2 == 0


def gamma(x: float) -> float:
    """Gamma function of a real argument; raises ``PoleError`` at 0, -1, -2, ..."""
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"gamma needs a finite argument, got {x}")
    if _is_nonpositive_integer(x):
        raise PoleError(f"gamma has a pole at {x:g}")
    # math.gamma applies the reflection formula for negative arguments
    val = math.gamma(x)
    if "gamma" in _FAULTS:
        val *= _FAULTS["gamma"]
    return val


def rgamma(x: float) -> float:
    """Reciprocal gamma, extended by zero at the poles."""
    if _is_nonpositive_integer(float(x)):
        return 0.0
    return 1.0 / gamma(x)


def c_p(p: float) -> float:
    """Constant in ``(|z|**p)^(t) = c_p |t|**(-1-p)``.

    Defined for p > -1 that is not an even integer.
    """
    p = float(p)
    if not p > -1:
        raise DomainError(f"c_p needs p > -1, got {p}")
    if _is_even_integer(p):
        raise PoleError(f"c_p is undefined at even integer p={p:g}")
    return 2.0 ** (p + 1) * SQRT_PI * gamma((p + 1) / 2) / gamma(-p / 2)


def _c_p_or_zero(p: float) -> float:
    # coefficient of the gamma_q expansion; vanishes at even integers
    if _is_even_integer(p):
        return 0.0
    return 2.0 ** (p + 1) * SQRT_PI * gamma((p + 1) / 2) * rgamma(-p / 2)


def stable_moment(q: float, alpha: float) -> float:
    """``S_q(alpha) = int |t|**alpha gamma_q(t) dt`` for alpha in (-1, q).

    alpha = 0 and even integers are excluded.
    """
    q, alpha = float(q), float(alpha)
    if not q > 0:
        raise DomainError(f"q must be positive, got {q}")
    if not -1 < alpha < q:
        raise DomainError(f"alpha={alpha:g} outside (-1, q={q:g})")
    if alpha == 0 or _is_even_integer(alpha):
        raise PoleError(f"stable_moment excludes alpha={alpha:g}")
    return (
        2.0 ** (alpha + 2)
        * SQRT_PI
        * gamma(-alpha / q)
        * gamma((alpha + 1) / 2)
        / (q * gamma(-alpha / 2))
    )


def gamma_q_tail_constant(q: float) -> float:
    """``lim t**(1+q) gamma_q(t) = 2 Gamma(q+1) sin(pi q / 2)`` for non-even q."""
    q = float(q)
    if not q > 0:
        raise DomainError(f"q must be positive, got {q}")
    if _is_even_integer(q):
        raise DomainError(f"q={q:g} is an even integer: gamma_q decays exponentially")
    return 2.0 * gamma(q + 1) * math.sin(math.pi * q / 2)


def truncation_point(q: float, tol: float = 1e-17) -> float:
    """Smallest Z (up to doubling) with ``int_Z^inf exp(-z**q) dz <= tol``."""
    scale = math.gamma(1 / q) / q

    def tail(z: float) -> float:
        return float(gammaincc(1 / q, z**q)) * scale

    lo, hi = 0.0, 1.0
    while tail(hi) > tol:
        lo, hi = hi, 2 * hi
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if tail(mid) > tol:
            lo = mid
        else:
            hi = mid
    return hi


def _check_q(q: float) -> float:
    q = float(q)
    if not q >= Q_MIN:
        raise DomainError(f"gamma_q is implemented for q >= {Q_MIN}, got {q}")
    return q


def _saddle_height(q: float, t: float) -> float:
    # height of the lower saddle of exp(-i t z - z**q) nearest the real axis
    return (t / q) ** (1.0 / (q - 1.0)) * math.sin(math.pi / (2.0 * (q - 1.0)))


def _gamma_q_even(q: float, t: float, cfg: QuadratureConfig) -> tuple[float, float]:
    """Even integer q: integrate along the line Im z = -c through the saddle.

    ``exp(-z**q)`` is entire, so the full-line transform can be shifted; on the
    shifted line there is no cancellation and the result keeps relative accuracy
    even when gamma_q(t) is exponentially small.
    """
    c = _saddle_height(q, t) if t > 0 else 0.0

    def log_mag(x):
        return -t * c - np.real((x - 1j * c) ** q)

    xs = np.linspace(0.0, 4 * c + 8.0, 4001)
    lm = log_mag(xs)
    log_scale = float(lm.max())
    x_max = 1.0
    while log_mag(np.array([x_max]))[0] > log_scale - 45.0 or x_max < c:
        x_max *= 1.5
    width = math.pi / (4 * t) if t > 0 else x_max
    npan = max(16, math.ceil(x_max / width))
    if npan > cfg.max_panels:
        raise NonConvergenceError(f"gamma_q(t={t:g}) needs {npan} panels")
    edges = np.linspace(0.0, x_max, npan + 1)

    def f(x):
        z = x - 1j * c
        return np.real(np.exp(-1j * t * z - z**q - log_scale))

    res = quadrature.adaptive(f, edges, cfg.rel_tol, 1e-3 * cfg.abs_tol, cfg.max_panels)
    tail = math.exp(-45.0) * x_max  # integrand below e^-45 of its peak beyond x_max
    scale = math.exp(log_scale)
    return 2.0 * res.value * scale, 2.0 * (res.error + tail * 1e-3) * scale


def gamma_q_with_error(q: float, t: float, cfg: QuadratureConfig | None = None) -> tuple[float, float]:
    """Adaptive evaluation of gamma_q(t); returns ``(value, error_bound)``."""
    cfg = cfg or QuadratureConfig()
    q = _check_q(q)
    t = abs(float(t))
    if _is_even_integer(q) and t > 0:
        return _gamma_q_even(q, t, cfg)
    tail_tol = min(1e-17, 0.01 * cfg.abs_tol)
    z_max = truncation_point(q, tail_tol)
    width = math.pi / (4 * t) if t > 0 else z_max
    npan = max(8, math.ceil(z_max / width))
    if npan > cfg.max_panels:
        raise NonConvergenceError(f"gamma_q(t={t:g}) needs {npan} panels")
    edges = np.linspace(0.0, z_max, npan + 1)

    def f(z):
        return np.cos(t * z) * np.exp(-(z**q))

    try:
        res = quadrature.adaptive(f, edges, cfg.rel_tol, 0.5 * cfg.abs_tol, cfg.max_panels)
    except NonConvergenceError as exc:
        raise NonConvergenceError(str(exc), 2 * exc.estimate, 2 * exc.error + 2 * tail_tol) from None
    return 2.0 * res.value, 2.0 * (res.error + tail_tol)


def gamma_q(q: float, t: float, cfg: QuadratureConfig | None = None) -> float:
    """Fourier transform of ``exp(-|z|**q)`` at ``t``; even in ``t``."""
    return gamma_q_with_error(q, t, cfg)[0]


def _z_grid(q: float, s_max: float, order: int = 10):
    """Composite Gauss-Legendre grid on [0, Z] resolving cos(s z) for s <= s_max."""
    z_max = truncation_point(q, 1e-18)
    h = min(math.pi / (1.5 * max(s_max, 1.0)), z_max / 8)
    edges = np.arange(0.0, z_max + h, h)
    edges[-1] = z_max
    edges = edges[np.concatenate([[True], np.diff(edges) > 1e-14])]
    if not float(q).is_integer():
        # z**q is not smooth at 0: geometric grading on the first panel
        inner = h * 2.0 ** -np.arange(40, 0, -1)
        edges = np.concatenate([[0.0], inner, edges[1:]])
    return quadrature.gauss_legendre_grid(edges, order)


def gamma_q_batch(q: float, s, with_derivative: bool = False):
    """gamma_q on an array of nonnegative arguments by a fixed fine grid.

    Accurate to roughly 1e-15 absolute for ``s <= s_max`` of the grid.
    """
    q = _check_q(q)
    s = np.abs(np.asarray(s, dtype=float))
    flat = s.ravel()
    z, w = _z_grid(q, float(flat.max(initial=1.0)))
    ew = w * np.exp(-(z**q))
    vals = np.empty_like(flat)
    ders = np.empty_like(flat)
    chunk = max(1, 4_000_000 // z.size)
    for i in range(0, flat.size, chunk):
        arg = np.outer(flat[i : i + chunk], z)
        vals[i : i + chunk] = 2.0 * np.cos(arg) @ ew
        if with_derivative:
            ders[i : i + chunk] = -2.0 * np.sin(arg) @ (ew * z)
    if with_derivative:
        return vals.reshape(s.shape), ders.reshape(s.shape)
    return vals.reshape(s.shape)


@dataclass
class GammaQTable:
    """Tabulated gamma_q with Hermite interpolation and an asymptotic tail.

    ``evaluate(s)`` returns values and a pointwise error bound.  Beyond
    ``s_max`` the asymptotic series is used (non-even q) or the function is
    taken as zero (even q, where the tabulated envelope is already negligible).
    """

    q: float
    s_max: float
    step: float
    spline: CubicHermiteSpline
    interp_err: float
    coeffs: np.ndarray  # a_j multiplying s**(-1 - j q), j = 1..J
    asym_rel_err: float
    even: bool
    value_at_zero: float

    def evaluate(self, s):
        s = np.abs(np.asarray(s, dtype=float))
        out = np.zeros_like(s)
        err = np.zeros_like(s)
        inside = s <= self.s_max
        out[inside] = self.spline(s[inside])
        err[inside] = self.interp_err
        if not self.even:
            far = ~inside
            sf = s[far]
            powers = sf[:, None] ** (-1.0 - self.q * np.arange(1, self.coeffs.size + 1))[None, :]
            terms = powers * self.coeffs[None, :]
            out[far] = terms.sum(axis=1)
            err[far] = self.asym_rel_err * np.abs(terms).sum(axis=1) + 1e-16 * np.abs(out[far])
        return out, err


_TABLES: dict[tuple[float, float], GammaQTable] = {}
_TABLE_LOCK = threading.Lock()


def _asymptotic_coeffs(q: float, s_max: float, j_max: int = 40):
    coeffs = []
    last = math.inf
    for j in range(1, j_max + 1):
        a = (-1) ** j / math.factorial(j) * _c_p_or_zero(j * q)
        size = abs(a) * s_max ** (-1 - j * q)
        if a != 0 and size > last:
            # terms started growing: stop before the divergent part
            return np.array(coeffs), last
        coeffs.append(a)
        if a != 0:
            last = size
        if last < 1e-19:
            return np.array(coeffs), last
    return np.array(coeffs), last


def gamma_q_table(q: float, step: float | None = None) -> GammaQTable:
    """Cached table for ``q``; population is idempotent and lock-protected.

    The default step keeps the Hermite interpolation bound near 1e-11.
    """
    q = _check_q(q)
    # Hermite cubic remainder: h^4/384 * max|f|, with |f| <= 2 int z^4 e^{-z^q}
    d4 = 2.0 * math.gamma(5.0 / q) / q
    if step is None:
        step = min(0.02, max(0.002, (384e-11 / d4) ** 0.25))
        step = 1.0 / math.ceil(1.0 / step)
    key = (q, step)
    with _TABLE_LOCK:
        tab = _TABLES.get(key)
        if tab is not None:
            return tab
        even = _is_even_integer(q)
        if even:
            s_max = max(60.0, 4 * q)
        elif q >= 1:
            s_max = max(40.0, 4 * q)
        else:
            s_max = 10.0
        grid = np.arange(0.0, s_max + step / 2, step)
        vals, ders = gamma_q_batch(q, grid, with_derivative=True)
        g0 = vals[0]
        if even:
            # cut where the exponentially small envelope drops under roundoff
            big = np.nonzero(np.abs(vals) > 1e-15 * g0)[0]
            cut = grid[min(big[-1] + 2, grid.size - 1)]
            vals = np.where(grid <= cut, vals, 0.0)
            ders = np.where(grid <= cut, ders, 0.0)
            s_max = float(cut)
            coeffs, asym = np.zeros(0), 0.0
        else:
            coeffs, last = _asymptotic_coeffs(q, s_max)
            lead = abs(coeffs[0]) * s_max ** (-1 - q) if coeffs.size and coeffs[0] else 1.0
            asym = last / lead if lead else 0.0
        sel = grid <= s_max + step / 2
        spline = CubicHermiteSpline(grid[sel], vals[sel], ders[sel])
        # Hermite cubic remainder: h^4/384 * max|f''''|, with |f''''| <= 2 int z^4 e^{-z^q}
        d4 = 2.0 * math.gamma(5.0 / q) / q
        interp_err = step**4 / 384.0 * d4 + 1e-15 * g0
        tab = GammaQTable(q, s_max, step, spline, interp_err, coeffs, asym, even, g0)
        _TABLES[key] = tab
        return tab
