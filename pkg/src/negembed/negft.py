"""Fourier transforms of negative norm powers ``(||x||**-p)^(xi)``.

Routes:

* ``closed``       -- sign-sum closed form for the max-norm (non-integer p)
* ``quad_linf``    -- one-dimensional oscillatory integral for the max-norm
* ``quad_lq``      -- one-dimensional integral of products of gamma_q
* ``lq_via_linf``  -- Monte Carlo average of max-norm transforms
* ``sphere``       -- sphere integral valid for any norm when n-1 <= p < n

The Fourier convention is ``f^(xi) = int f(x) exp(-i (x, xi)) dx``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Union

import mpmath
import numpy as np

from . import quadrature, specfun
from .config import DomainError, NonConvergenceError, QuadratureConfig
from .quadrature import EPS

METHODS = ("closed", "quad_linf", "quad_lq", "lq_via_linf", "sphere")


# --------------------------------------------------------------------------- spaces


@dataclass(frozen=True)
class LqNorm:
    """The space l_q^n; ``q = inf`` is the max-norm."""

    q: float
    n: int

    def __post_init__(self) -> None:
        if not (self.q > 0):
            raise DomainError(f"q must be positive (or inf), got {self.q}")
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n}")
        object.__setattr__(self, "q", float(self.q))
        object.__setattr__(self, "n", int(self.n))

    @property
    def is_max(self) -> bool:
        return math.isinf(self.q)

    def norm(self, x) -> np.ndarray:
        x = np.abs(np.asarray(x, dtype=float))
        if self.is_max:
            return x.max(axis=-1)
        return (x**self.q).sum(axis=-1) ** (1.0 / self.q)

    def describe(self) -> dict:
        return {"kind": "lq", "q": "inf" if self.is_max else self.q, "n": self.n}


@dataclass(frozen=True)
class SpectralSubspace:
    """``||x|| = (sum_j |sum_i x_i s_ij|**r)**(1/r)`` for an n-by-m atom matrix."""

    atoms: np.ndarray = field(compare=False)
    r: float

    def __post_init__(self) -> None:
        s = np.array(self.atoms, dtype=float)
        if s.ndim != 2:
            raise DomainError("atoms must be a 2-d matrix")
        if not 0 < self.r <= 2:
            raise DomainError(f"r must lie in (0, 2], got {self.r}")
        if np.linalg.matrix_rank(s) < s.shape[0]:
            raise DomainError("atom matrix must have full row rank so the norm is positive")
        s.setflags(write=False)
        object.__setattr__(self, "atoms", s)
        object.__setattr__(self, "r", float(self.r))

    @property
    def n(self) -> int:
        return self.atoms.shape[0]

    def norm(self, x) -> np.ndarray:
        y = np.asarray(x, dtype=float) @ self.atoms
        return (np.abs(y) ** self.r).sum(axis=-1) ** (1.0 / self.r)

    def describe(self) -> dict:
        return {"kind": "spectral", "r": self.r, "atoms": self.atoms.tolist()}


SpaceSpec = Union[LqNorm, SpectralSubspace]
Space = SpaceSpec


@dataclass(frozen=True)
class TransformValue:
    value: float
    err_estimate: float
    method: str
    converged: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "value", float(self.value))
        object.__setattr__(self, "err_estimate", float(self.err_estimate))
        object.__setattr__(self, "converged", bool(self.converged))

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "err_estimate": self.err_estimate,
            "method": self.method,
            "converged": self.converged,
        }


# ------------------------------------------------------------------ sign sums


def _as_xi(xi, allow_zero: bool = False) -> np.ndarray:
    x = np.atleast_1d(np.asarray(xi, dtype=float))
    if x.ndim != 1 or x.size == 0:
        raise DomainError("xi must be a non-empty vector")
    if not np.all(np.isfinite(x)):
        raise DomainError("xi must be finite")
    if not allow_zero and np.any(x == 0):
        raise DomainError("xi must have non-zero coordinates")
    return x


@lru_cache(maxsize=16)
def _sign_patterns(n: int) -> np.ndarray:
    return np.array(list(itertools.product((1.0, -1.0), repeat=n)))


def _terms(p: float, xi: np.ndarray, with_sign: bool):
    d = _sign_patterns(xi.size)
    s = d @ xi
    mag = np.abs(s)
    with np.errstate(divide="ignore"):
        body = mag**p
    if with_sign:
        body = body * np.sign(s)
    terms = np.prod(d, axis=1) * body
    # rounding in s propagates through |s|^p
    with np.errstate(divide="ignore", invalid="ignore"):
        slope = np.where(mag > 0, abs(p) * mag ** (p - 1), 0.0)
    bound = EPS * (np.abs(body) + slope * xi.size * np.abs(xi).sum())
    return terms, bound


def _signed_sum(p: float, xi, with_sign: bool) -> tuple[float, float]:
    x = _as_xi(xi)
    terms, bound = _terms(float(p), x, with_sign)
    # magnitudes sorted descending, then exactly rounded summation
    order = np.argsort(-np.abs(terms))
    total = math.fsum(terms[order])
    err = 2.0 * float(bound.sum()) + EPS * abs(total)
    return total, err


def h_np(p: float, xi) -> float:
    """``sum_delta delta_1...delta_n |delta . xi|**p`` over all 2**n sign vectors."""
    return _signed_sum(p, xi, False)[0]


def g_np(p: float, xi) -> float:
    """As ``h_np`` with the extra factor ``sgn(delta . xi)``."""
    return _signed_sum(p, xi, True)[0]


def u_np(p: float, xi) -> float:
    """``g_np`` for odd n, ``h_np`` for even n."""
    x = _as_xi(xi)
    return _signed_sum(p, x, x.size % 2 == 1)[0]


def _neumaier_columns(cols: np.ndarray) -> np.ndarray:
    """Compensated sum over axis 1, vectorized over rows."""
    s = np.zeros(cols.shape[0])
    c = np.zeros(cols.shape[0])
    for j in range(cols.shape[1]):
        v = cols[:, j]
        t = s + v
        c += np.where(np.abs(s) >= np.abs(v), (s - t) + v, (v - t) + s)
        s = t
    return s + c


def sign_sum_batch(p: float, X, with_sign: bool):
    """Row-wise sign sums for an (N, n) array; returns ``(sums, error_bounds)``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n = X.shape[1]
    d = _sign_patterns(n)
    S = X @ d.T
    mag = np.abs(S)
    with np.errstate(divide="ignore"):
        body = mag**p
    if with_sign:
        body = body * np.sign(S)
    cols = body * np.prod(d, axis=1)[None, :]
    order = np.argsort(-np.abs(cols), axis=1)
    cols = np.take_along_axis(cols, order, axis=1)
    total = _neumaier_columns(cols)
    with np.errstate(divide="ignore", invalid="ignore"):
        slope = np.where(mag > 0, abs(p) * mag ** (p - 1), 0.0)
    bound = EPS * (np.abs(body) + slope * n * np.abs(X).sum(axis=1, keepdims=True))
    return total, 2.0 * bound.sum(axis=1) + EPS * np.abs(total)


# ----------------------------------------------------------- max-norm closed


def _check_nonint_p(p: float) -> float:
    p = float(p)
    if not p > 0:
        raise DomainError(f"p must be positive, got {p}")
    if p.is_integer():
        raise DomainError(f"closed form requires non-integer p, got {p:g}")
    return p


def _linf_prefactor(p: float, n: int) -> float:
    if n % 2:
        sign = -1.0 if ((n - 1) // 2) % 2 else 1.0
        return sign * 2.0**-p * specfun.SQRT_PI * specfun.gamma((1 - p) / 2) / specfun.gamma(p / 2)
    sign = -1.0 if (n // 2 + 1) % 2 else 1.0
    return sign * 2.0**-p * specfun.SQRT_PI * specfun.gamma((2 - p) / 2) / specfun.gamma((p + 1) / 2)


def ft_linf_closed(p: float, xi) -> TransformValue:
    """Closed form of the max-norm transform (non-integer p > 0)."""
    p = _check_nonint_p(p)
    x = _as_xi(xi)
    n = x.size
    pref = _linf_prefactor(p, n) / float(np.prod(x))
    total, err = _signed_sum(p, x, n % 2 == 1)
    value = pref * total
    err_v = abs(pref) * err + 1e-12 * abs(value) + 1e-300
    return TransformValue(value, err_v, "closed")


def ft_linf_closed_batch(p: float, X):
    """Vectorized closed form over rows of ``X``; returns ``(values, errors)``."""
    p = _check_nonint_p(p)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n = X.shape[1]
    if np.any(X == 0):
        raise DomainError("xi must have non-zero coordinates")
    pref = _linf_prefactor(p, n) / np.prod(X, axis=1)
    total, err = sign_sum_batch(p, X, n % 2 == 1)
    value = pref * total
    return value, np.abs(pref) * err + 1e-12 * np.abs(value) + 1e-300


# ------------------------------------------------------- max-norm quadrature


def _sinc_product(xi: np.ndarray):
    def g(t):
        t = np.asarray(t, dtype=float)
        out = np.ones_like(t)
        for x in xi:
            out = out * np.sinc(t * (x / math.pi))
        return out

    return g


def _oscillatory_tail(p: float, xi: np.ndarray, T: float) -> tuple[float, float]:
    """``int_T^inf t**(-p-1) prod sin(t xi_k) dt`` via incomplete gamma functions.

    The product of sines is expanded into exponentials ``exp(i t delta.xi)``;
    each frequency integrates to ``(-i w)**p Gamma(-p, -i w T)``.
    """
    n = xi.size
    total = 0j
    size = 0.0
    seen: dict[float, complex] = {}
    for d in _sign_patterns(n):
        w = float(d @ xi)
        sgn = float(np.prod(d))
        if w in seen:
            J = seen[w]
        elif w == 0.0:
            J = complex(T**-p / p)
        else:
            b = mpmath.mpc(0, -w)
            J = complex(mpmath.power(b, p) * mpmath.gammainc(-p, b * T))
        seen[w] = J
        total += sgn * J
        size += abs(J)
    total *= (2j) ** -n
    return total.real, (1e-13 * size + abs(total.imag)) * 2.0**-n


def ft_linf_quadrature(p: float, xi, cfg: QuadratureConfig | None = None) -> TransformValue:
    """Max-norm transform from ``2**n p int_0^inf t**(-p-1) prod sin(t xi_k)/xi_k dt``.

    Works for integer p.  The integral is split into a Gauss-Jacobi panel at
    the origin (integrand ~ t**(n-p-1)), an adaptive oscillatory middle, and an
    exact tail from incomplete gamma functions.
    """
    cfg = cfg or QuadratureConfig()
    x = _as_xi(xi)
    n = x.size
    p = float(p)
    if not 0 < p < n:
        raise DomainError(f"need 0 < p < n={n}, got {p}")
    ax = np.abs(x)
    freq = float(ax.sum())
    scale = 2.0**n * p
    beta = n - p - 1.0
    g = _sinc_product(x)
    a = min(1.0, math.pi / (2 * freq))
    head, head_err, head_abs = quadrature.power_panel(g, a, beta)
    # below ~1/min xi the exponential form of the tail cancels catastrophically
    T = max(16.0, 8 * math.pi / freq, 2.0 / float(ax.min()))
    width = math.pi / (2 * freq)
    npan = max(4, math.ceil((T - a) / width))
    edges = np.linspace(a, T, npan + 1)

    def body(t):
        return t**beta * g(t)

    tol_abs = cfg.abs_tol / scale
    try:
        mid = quadrature.adaptive(body, edges, cfg.rel_tol, tol_abs, cfg.max_panels)
    except NonConvergenceError as exc:
        raise NonConvergenceError(
            str(exc), scale * (head + exc.estimate), scale * (head_err + exc.error)
        ) from None
    tail, tail_err = _oscillatory_tail(p, x, T)
    tail /= float(np.prod(x))
    tail_err /= float(np.prod(ax))
    value = scale * (float(head) + mid.value + tail)
    roundoff = 50 * EPS * (head_abs + mid.abs_integral + abs(tail))
    err = scale * (head_err + mid.error + tail_err + roundoff)
    return TransformValue(value, err, "quad_linf")


# ------------------------------------------------------------ l_q quadrature


def _lq_tail(table: specfun.GammaQTable, p: float, ax: np.ndarray, T: float) -> tuple[float, float]:
    """``int_T^inf t**(n-p-1) prod gamma_q(t xi_k) dt`` from the asymptotic series.

    With ``t = T u`` each factor is a polynomial in ``u**-q`` whose coefficients
    involve ``(T xi_k)**(-j q)``, all bounded because ``T xi_k >= s_max``.
    """
    q = table.q
    J = table.coeffs.size
    poly = np.array([1.0])
    for x in ax:
        pk = np.zeros(J + 1)
        pk[1:] = table.coeffs * (T * x) ** (-q * np.arange(1, J + 1))
        poly = np.convolve(poly, pk)
    deg = np.arange(poly.size)
    contrib = poly / (p + q * deg)
    scale = T**-p / float(np.prod(T * ax)) * T ** ax.size
    value = scale * float(contrib.sum())
    err = scale * (ax.size * table.asym_rel_err + 1e-15) * float(np.abs(contrib).sum())
    return value, err


def ft_lq_quadrature(q: float, p: float, xi, cfg: QuadratureConfig | None = None) -> TransformValue:
    """l_q transform ``q / Gamma(p/q) int_0^inf t**(n-p-1) prod gamma_q(t xi_k) dt``.

    gamma_q comes from a cached Hermite table; its interpolation and asymptotic
    errors are integrated alongside the value and folded into the estimate.
    """
    cfg = cfg or QuadratureConfig()
    x = _as_xi(xi)
    n = x.size
    q, p = float(q), float(p)
    if math.isinf(q):
        return ft_linf_quadrature(p, x, cfg) if p.is_integer() else ft_linf_closed(p, x)
    if not 0 < p < n:
        raise DomainError(f"need 0 < p < n={n}, got {p}")
    table = specfun.gamma_q_table(q)
    pref = q / specfun.gamma(p / q)
    ax = np.abs(x)
    lo_x, hi_x = float(ax.min()), float(ax.max())
    beta = n - p - 1.0

    def head_f(t):
        vals = specfun.gamma_q_batch(q, np.outer(t, ax))
        return np.prod(vals, axis=1)

    a0 = 0.5 / hi_x
    head, head_err, head_abs = quadrature.power_panel(head_f, a0, beta)

    def body(t):
        vals, errs = table.evaluate(np.outer(t, ax))
        prod = np.prod(vals, axis=1)
        absv = np.abs(vals)
        # first-order propagation of the per-factor error bounds
        spread = np.zeros_like(prod)
        for k in range(n):
            others = np.prod(np.delete(absv, k, axis=1), axis=1)
            spread += errs[:, k] * others
        w = t**beta
        return np.vstack([w * prod, w * spread])

    t_lin = table.s_max / hi_x
    t_end = t_lin if table.even else table.s_max / lo_x
    lin = np.arange(a0, t_lin, 1.0 / hi_x)
    edges = np.concatenate([lin, [t_lin]])
    if t_end > t_lin * (1 + 1e-12):
        k = max(1, math.ceil(math.log(t_end / t_lin) / math.log(1.5)))
        edges = np.concatenate([edges, np.geomspace(t_lin, t_end, k + 1)[1:]])
    edges = np.unique(edges)
    try:
        mid = quadrature.adaptive(body, edges, cfg.rel_tol, cfg.abs_tol / abs(pref), cfg.max_panels)
    except NonConvergenceError as exc:
        raise NonConvergenceError(str(exc), pref * (head + exc.estimate), abs(pref) * exc.error) from None
    mid_val, mid_spread = mid.value
    if table.even:
        tail, tail_err = 0.0, 0.0
    else:
        tail, tail_err = _lq_tail(table, p, ax, t_end)
    value = pref * (float(head) + float(mid_val) + tail)
    roundoff = 50 * EPS * (head_abs + mid.abs_integral)
    err = abs(pref) * (head_err + mid.error + abs(float(mid_spread)) + tail_err + roundoff)
    return TransformValue(value, err, "quad_lq")


def riesz_transform(p: float, xi) -> float:
    """``(||x||_2**-p)^(xi)`` in closed form."""
    x = _as_xi(xi, allow_zero=True)
    n = x.size
    r = float(np.linalg.norm(x))
    return (
        2.0 ** (n - p)
        * math.pi ** (n / 2)
        * specfun.gamma((n - p) / 2)
        / specfun.gamma(p / 2)
        * r ** (p - n)
    )


# ----------------------------------------------------- l_q via max-norm MC


def ft_lq_via_linf(q: float, p: float, xi, cfg: QuadratureConfig | None = None) -> TransformValue:
    """l_q transform as a weighted average of max-norm transforms.

    Samples ``t_k = U_k**(1/q)`` with ``U_k ~ Gamma(1 + 1/q)``, whose joint density
    is proportional to ``prod t_k**q exp(-t_k**q)``; the estimate is
    ``q Gamma(1+1/q)**n / (p Gamma(p/q)) * mean(F_inf(t * xi))``.
    ``err_estimate`` is three standard errors.
    """
    cfg = cfg or QuadratureConfig()
    x = _as_xi(xi)
    n = x.size
    q, p = float(q), float(p)
    if not q > 0 or math.isinf(q):
        raise DomainError(f"q must be finite and positive, got {q}")
    if not 0 < p < n:
        raise DomainError(f"need 0 < p < n={n}, got {p}")
    _check_nonint_p(p)
    scale = q * specfun.gamma(1 + 1 / q) ** n / (p * specfun.gamma(p / q))
    ss = np.random.SeedSequence(cfg.mc_seed, spawn_key=(0x11F,))
    rng = np.random.Generator(np.random.Philox(ss))
    total = cfg.mc_samples
    chunk = max(1024, 2**21 // (2**n))
    sums, sqs = [], []
    done = 0
    while done < total:
        m = min(chunk, total - done)
        t = rng.gamma(1 + 1 / q, size=(m, n)) ** (1 / q)
        vals, _ = ft_linf_closed_batch(p, t * x[None, :])
        sums.append(float(vals.sum()))
        sqs.append(float((vals * vals).sum()))
        done += m
    mean = math.fsum(sums) / total
    var = max(math.fsum(sqs) / total - mean * mean, 0.0) * total / (total - 1)
    se = math.sqrt(var / total)
    value = scale * mean
    se_v = abs(scale) * se
    converged = se_v <= cfg.mc_rel_tol * abs(value)
    return TransformValue(value, 3.0 * se_v, "lq_via_linf", converged)


# ------------------------------------------------------------- sphere route


def _orthonormal_complement(u: np.ndarray) -> np.ndarray:
    n = u.size
    q, _ = np.linalg.qr(np.column_stack([u, np.eye(n)]))
    basis = q[:, 1:n]
    return basis


@lru_cache(maxsize=64)
def _sphere_rule(dim: int, level: int):
    """Product rule on the unit sphere S^dim in R^(dim+1): nodes, weights."""
    if dim == 0:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    if dim == 1:
        m = 32 * 2**level
        ang = (np.arange(m) + 0.5) * (2 * math.pi / m)
        return np.column_stack([np.cos(ang), np.sin(ang)]), np.full(m, 2 * math.pi / m)
    # S^dim: w = cos(polar) with weight (1 - w^2)^((dim-2)/2)
    k = 8 * 2**level
    a = (dim - 2) / 2.0
    from scipy.special import roots_jacobi

    w, ww = roots_jacobi(k, a, a)
    sub, subw = _sphere_rule(dim - 1, level)
    rad = np.sqrt(1 - w**2)
    nodes = np.concatenate(
        [np.column_stack([np.full(sub.shape[0], wi), ri * sub]) for wi, ri in zip(w, rad)]
    )
    weights = np.concatenate([wi * subw for wi in ww])
    return nodes, weights


NormLike = Union[Space, Callable[[np.ndarray], np.ndarray]]


def _norm_fn(space: NormLike) -> Callable[[np.ndarray], np.ndarray]:
    if hasattr(space, "norm"):
        return space.norm  # type: ignore[union-attr]
    return space  # type: ignore[return-value]


def _kink_functionals(space) -> np.ndarray:
    """Linear functionals whose zero sets carry the norm's non-smooth points."""
    if isinstance(space, SpectralSubspace):
        return np.zeros((0, space.n)) if space.r == 2 else space.atoms.T.copy()
    if isinstance(space, LqNorm):
        eye = np.eye(space.n)
        if space.is_max:
            pairs = itertools.combinations(range(space.n), 2)
            return np.array([eye[i] + sg * eye[j] for i, j in pairs for sg in (1.0, -1.0)]).reshape(-1, space.n)
        if space.q % 2 == 0:
            return np.zeros((0, space.n))
        return eye
    return np.zeros((0, 0))


def _smoothed_pieces(lo, hi, pieces: int, order: int = 12):
    """Nodes/weights on [lo, hi] (broadcast over leading axes).

    Each of ``pieces`` equal parts is mapped through ``u**3 (10 - 15u + 6u**2)``,
    whose Jacobian vanishes to second order at both ends, so algebraic
    endpoint singularities (kinks of the norm) cost little accuracy.
    """
    x, w = np.polynomial.legendre.leggauss(order)
    u = 0.5 * (x + 1)
    wu = 0.5 * w * 30 * u**2 * (1 - u) ** 2
    mu = u**3 * (10 - 15 * u + 6 * u**2)
    frac = np.arange(pieces)[:, None] + mu[None, :]
    lo = np.asarray(lo)[..., None, None]
    width = (np.asarray(hi)[..., None, None] - lo) / pieces
    nodes = lo + width * frac
    weights = width * np.broadcast_to(wu, frac.shape)
    shape = nodes.shape[:-3] + (-1,)
    return nodes.reshape(shape), weights.reshape(shape)


def _phi_nodes(p: float, n: int, level: int, breaks: np.ndarray):
    """Rule for ``int_0^(pi/2) sin(phi)**(p-n) cos(phi)**(n-2) G(phi) d phi``."""
    from scipy.special import roots_jacobi

    s = p - n
    breaks = np.sort(breaks[(breaks > 1e-9) & (breaks < math.pi / 2 - 1e-9)])
    phi0 = min(math.pi / 16, 0.5 * breaks[0]) if breaks.size else math.pi / 16
    x, w = roots_jacobi(12 + 4 * level, 0.0, s)
    t = 0.5 * phi0 * (1 + x)
    wj = w * (0.5 * phi0) ** (s + 1) * (np.sin(t) / t) ** s * np.cos(t) ** (n - 2)
    # dyadic edges grade the panels geometrically away from the singular circle
    dyadic = phi0 * 2.0 ** np.arange(1, 64)
    dyadic = dyadic[dyadic < math.pi / 2 * 0.75]
    inner = np.unique(np.concatenate([breaks[breaks > phi0], dyadic]))
    edges = np.concatenate([[phi0], inner, [math.pi / 2]])
    nodes, weights = _smoothed_pieces(edges[:-1], edges[1:], 2 ** (level + 1))
    nodes, weights = nodes.ravel(), weights.ravel()
    weights = weights * np.sin(nodes) ** s * np.cos(nodes) ** (n - 2)
    return np.concatenate([t, nodes]), np.concatenate([wj, weights])


def _ring_values(norm, p, phis, xhat, basis, funcs, level):
    """``int_0^(2 pi) ||sin(phi) xhat + cos(phi) eta(psi)||**-p d psi`` for each phi."""
    b1, b2 = basis[:, 0], basis[:, 1]
    if funcs.size:
        al, be, ga = funcs @ b1, funcs @ b2, funcs @ xhat
        rho = np.hypot(al, be)
        psi0 = np.arctan2(be, al)
    out = np.empty(phis.size)
    pieces = 2**level
    chunk = max(1, 2**17 // (pieces * 12 * (2 * funcs.shape[0] + 1)))
    for i in range(0, phis.size, chunk):
        ph = phis[i : i + chunk]
        cuts = [np.zeros((ph.size, 1)), np.full((ph.size, 1), 2 * math.pi)]
        if funcs.size:
            with np.errstate(divide="ignore", invalid="ignore"):
                c = -np.tan(ph)[:, None] * ga[None, :] / rho[None, :]
                d = np.arccos(np.where(np.abs(c) <= 1, c, np.nan))
            cuts += [np.mod(psi0 + d, 2 * math.pi), np.mod(psi0 - d, 2 * math.pi)]
        edges = np.sort(np.nan_to_num(np.hstack(cuts), nan=0.0), axis=1)
        psi, w = _smoothed_pieces(edges[:, :-1], edges[:, 1:], pieces)
        eta = np.cos(psi)[..., None] * b1 + np.sin(psi)[..., None] * b2
        pts = np.sin(ph)[:, None, None] * xhat + np.cos(ph)[:, None, None] * eta
        out[i : i + chunk] = np.sum(norm(pts) ** -p * w, axis=1)
    return out


def _sphere_level(norm, funcs, p: float, n: int, xhat: np.ndarray, basis: np.ndarray, level: int) -> float:
    s = p - n
    if n == 3:
        if s == -1.0:
            return math.pi * float(_ring_values(norm, p, np.zeros(1), xhat, basis, funcs, level)[0])
        if funcs.size:
            ga = np.abs(funcs @ xhat)
            perp = np.linalg.norm(funcs @ basis, axis=1)
            breaks = np.arctan2(perp, ga)
            # where two kink circles cross, ring breakpoints merge and G has a kink
            cross = [np.cross(a, b) for a, b in itertools.combinations(funcs, 2)]
            cross = np.array([c / np.linalg.norm(c) for c in cross if np.linalg.norm(c) > 1e-12]).reshape(-1, 3)
            breaks = np.concatenate([breaks, np.arcsin(np.minimum(np.abs(cross @ xhat), 1.0))])
        else:
            breaks = np.zeros(0)
        phis, wphi = _phi_nodes(p, n, level, breaks)
        G = _ring_values(norm, p, phis, xhat, basis, funcs, level)
        return 2.0 * math.pi / specfun.c_p(s) * float(G @ wphi)
    ring, ring_w = _sphere_rule(n - 2, level)
    ring_pts = ring @ basis.T
    if s == -1.0:
        return math.pi * float((norm(ring_pts) ** -p) @ ring_w)
    if n == 2 and funcs.size:
        breaks = np.arctan2(np.abs(funcs @ basis[:, 0]), np.abs(funcs @ xhat))
    else:
        breaks = np.zeros(0)
    phis, wphi = _phi_nodes(p, n, level, breaks)
    pts = np.sin(phis)[:, None, None] * xhat + np.cos(phis)[:, None, None] * ring_pts[None, :, :]
    G = (norm(pts) ** -p) @ ring_w
    return 2.0 * math.pi / specfun.c_p(s) * float(G @ wphi)


def ft_sphere(space: NormLike, p: float, xi, cfg: QuadratureConfig | None = None, n: int | None = None) -> TransformValue:
    """Transform of ``||x||**-p`` for any norm when ``n-1 <= p < n``.

    ``(pi / c) int_Omega |(theta, xi)|**(p-n) ||theta||**-p dtheta`` with
    ``c = c_p(p - n)``; at ``p = n-1`` the integral over the great sphere
    orthogonal to ``xi`` (times pi) is used instead.  Polar coordinates about
    ``xi`` put the kernel singularity at one endpoint (Gauss-Jacobi); for
    known spaces the norm's kink sets are located exactly and used as
    breakpoints.  Rules are refined by doubling until successive levels agree
    to ``cfg.sphere_rel_tol``.
    """
    cfg = cfg or QuadratureConfig()
    x = _as_xi(xi, allow_zero=True)
    dim = n if n is not None else getattr(space, "n", x.size)
    if x.size != dim:
        raise DomainError(f"xi has {x.size} coordinates, space has {dim}")
    if dim < 2:
        raise DomainError("sphere route needs n >= 2")
    p = float(p)
    if not dim - 1 <= p < dim:
        raise DomainError(f"sphere route needs p in [n-1, n) = [{dim - 1}, {dim}), got {p}")
    r = float(np.linalg.norm(x))
    if r == 0:
        raise DomainError("xi must be non-zero")
    norm = _norm_fn(space)
    funcs = _kink_functionals(space)
    if funcs.shape[1] != dim:
        funcs = np.zeros((0, dim))
    xhat = x / r
    basis = _orthonormal_complement(xhat)
    max_level = {2: 10, 3: 5, 4: 3}.get(dim, 2)
    scale = r ** (p - dim)
    prev = None
    est = err = math.nan
    for level in range(max_level + 1):
        cur = _sphere_level(norm, funcs, p, dim, xhat, basis, level)
        if prev is not None:
            est, err = cur, abs(cur - prev)
            if err <= cfg.sphere_rel_tol * abs(cur):
                return TransformValue(est * scale, (err + 1e-14 * abs(est)) * scale, "sphere")
        prev = cur
    raise NonConvergenceError(
        f"sphere rule did not reach rel tol {cfg.sphere_rel_tol:g}", est * scale, err * scale
    )


# --------------------------------------------------------- recurrence check


def u_recurrence_residual(p: float, xi, cfg: QuadratureConfig | None = None) -> float:
    """``|u_{n,p}(xi) - p int_{-xi_n}^{xi_n} u_{n-1,p-1}(xi_1 + x, xi_2..xi_{n-1}) dx|``.

    Requires positive coordinates with ``xi_1 >= xi_n``.  The integrand has
    kinks where a signed sum vanishes; those points become breakpoints.
    """
    cfg = cfg or QuadratureConfig(rel_tol=1e-12, abs_tol=1e-14)
    x = _as_xi(xi)
    n = x.size
    p = float(p)
    if n < 3:
        raise DomainError("recurrence check needs n >= 3")
    if np.any(x <= 0) or x[0] < x[-1]:
        raise DomainError("need positive coordinates with xi_1 >= xi_n")
    if p.is_integer() or (p - 1).is_integer():
        raise DomainError("p and p-1 must be non-integers")
    lhs = u_np(p, x)
    inner = x[1:-1]
    with_sign = (n - 1) % 2 == 1
    kinks = {-x[0] - float(d @ inner) for d in _sign_patterns(inner.size)}
    kinks |= {-x[0] + float(d @ inner) for d in _sign_patterns(inner.size)}
    lo, hi = -x[-1], x[-1]
    pts = sorted({lo, hi} | {k for k in kinks if lo < k < hi})

    def f(t):
        rows = np.column_stack([x[0] + t, np.broadcast_to(inner, (t.size, inner.size))])
        vals, _ = sign_sum_batch(p - 1, rows, with_sign)
        return vals

    res = quadrature.adaptive(f, pts, cfg.rel_tol, cfg.abs_tol, cfg.max_panels)
    return abs(lhs - p * res.value)
