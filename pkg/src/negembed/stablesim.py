"""Symmetric stable vectors and norm-moment comparisons.

``X_i = sum_j s_ij U_j`` with i.i.d. standard symmetric q-stable ``U_j`` has
characteristic function ``exp(-sum_j |sum_i xi_i s_ij|**q)``.  The decoupled
``Y`` draws its first k coordinates and its remaining coordinates from
independent copies of ``U``, so each block keeps its law while the blocks
become independent.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import DomainError, MomentNotFiniteError
from .negft import LqNorm, SpaceSpec

Z99 = 2.5758293035489004  # two-sided 99% normal quantile
MOM_BLOCKS = 64
# asymptotic sd of a sample median relative to the mean, sqrt(pi/2)
MEDIAN_EFF = math.sqrt(math.pi / 2)

STREAM_X, STREAM_Y1, STREAM_Y2 = 1, 2, 3


def stream(seed: int, stream_id: int, partition: int = 0) -> np.random.Generator:
    """Counter-based generator keyed by ``(seed, stream_id, partition)``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(stream_id), int(partition)))
    return np.random.Generator(np.random.Philox(ss))


def sample_standard_stable(q: float, rng: np.random.Generator, size=None):
    """Symmetric stable variates with characteristic function ``exp(-|t|**q)``.

    Chambers-Mallows-Stuck; at q=2 this is N(0, 2) and at q=1 standard Cauchy.
    """
    q = float(q)
    if not 0 < q <= 2:
        raise DomainError(f"q must lie in (0, 2], got {q}")
    phi = rng.uniform(-math.pi / 2, math.pi / 2, size)
    w = rng.standard_exponential(size)
    if q == 1.0:
        return np.tan(phi)
    return np.sin(q * phi) / np.cos(phi) ** (1 / q) * (np.cos((1 - q) * phi) / w) ** ((1 - q) / q)


@dataclass(frozen=True)
class StableSpec:
    q: float
    atoms: np.ndarray = field(compare=False)
    k: int

    def __post_init__(self) -> None:
        s = np.array(self.atoms, dtype=float)
        if s.ndim != 2:
            raise DomainError("atoms must be an n-by-m matrix")
        if not 0 < self.q <= 2:
            raise DomainError(f"q must lie in (0, 2], got {self.q}")
        if not 1 <= self.k < s.shape[0]:
            raise DomainError(f"block split k must satisfy 1 <= k < n={s.shape[0]}")
        s.setflags(write=False)
        object.__setattr__(self, "atoms", s)
        object.__setattr__(self, "q", float(self.q))
        object.__setattr__(self, "k", int(self.k))

    @property
    def n(self) -> int:
        return self.atoms.shape[0]

    @property
    def m(self) -> int:
        return self.atoms.shape[1]

    def rank_x(self) -> int:
        return int(np.linalg.matrix_rank(self.atoms))

    def rank_y(self) -> int:
        s = self.atoms
        return int(np.linalg.matrix_rank(s[: self.k]) + np.linalg.matrix_rank(s[self.k :]))

    def log_cf_x(self, xi) -> np.ndarray:
        return -(np.abs(np.asarray(xi, dtype=float) @ self.atoms) ** self.q).sum(axis=-1)

    def log_cf_y(self, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        s, k = self.atoms, self.k
        a = (np.abs(xi[..., :k] @ s[:k]) ** self.q).sum(axis=-1)
        b = (np.abs(xi[..., k:] @ s[k:]) ** self.q).sum(axis=-1)
        return -(a + b)

    def to_dict(self) -> dict:
        return {"q": self.q, "k": self.k, "atoms": self.atoms.tolist()}


def coupled_atoms(n: int) -> np.ndarray:
    """Row i has ones at columns i and i+1 (mod n)."""
    return np.eye(n) + np.roll(np.eye(n), 1, axis=1)


ATOM_PRESETS = {"identity": np.eye, "coupled": coupled_atoms}


def sample_X(spec: StableSpec, rng: np.random.Generator, size: int = 1) -> np.ndarray:
    u = sample_standard_stable(spec.q, rng, (size, spec.m))
    return u @ spec.atoms.T


def sample_Y(
    spec: StableSpec, rng: np.random.Generator, size: int = 1, rng_b: np.random.Generator | None = None
) -> np.ndarray:
    """Block-decoupled sample; the second block uses ``rng_b`` when given."""
    rng_b = rng if rng_b is None else rng_b
    s, k = spec.atoms, spec.k
    u1 = sample_standard_stable(spec.q, rng, (size, spec.m))
    u2 = sample_standard_stable(spec.q, rng_b, (size, spec.m))
    return np.hstack([u1 @ s[:k].T, u2 @ s[k:].T])


# ------------------------------------------------------------- estimation


@dataclass(frozen=True)
class MomentEstimate:
    estimate: float
    ci_half: float
    estimator: str
    heuristic: bool
    n_samples: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def check_moment(p_signed: float, n_eff: int, q: float | None = None) -> None:
    """Raise if ``E||.||**p_signed`` does not exist."""
    if p_signed < 0 and -p_signed >= n_eff:
        raise MomentNotFiniteError(
            f"E||X||^{p_signed:g} is infinite: negative moments need p < {n_eff} (dimension of the law)"
        )
    if q is not None and q < 2 and p_signed >= q:
        raise MomentNotFiniteError(
            f"E||X||^{p_signed:g} does not exist for q={q:g}: q-stable laws with q<2 only have moments of order < q"
        )


def choose_estimator(p_signed: float, n_eff: int) -> str:
    return "median_of_means" if p_signed < 0 and -2 * p_signed >= n_eff else "mean"


def estimate_mean(values, estimator: str = "mean", blocks: int = MOM_BLOCKS) -> MomentEstimate:
    """Mean or median-of-means with a 99% interval.

    Values are shifted by the first one before averaging so a constant stream
    returns that constant exactly with a zero-width interval.
    """
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise DomainError("empty sample")
    x0 = v[0]
    d = v - x0
    if estimator == "mean":
        mean = math.fsum(np.sum(c) for c in np.array_split(d, max(1, v.size // 65536)))
        mean /= v.size
        sd = float(np.std(d, ddof=1)) if v.size > 1 else 0.0
        return MomentEstimate(x0 + mean, Z99 * sd / math.sqrt(v.size), "mean", False, v.size)
    if estimator != "median_of_means":
        raise DomainError(f"unknown estimator {estimator!r}")
    b = min(blocks, v.size)
    bm = np.array([np.mean(c) for c in np.array_split(d, b)])
    med = float(np.median(bm))
    sd = float(np.std(bm, ddof=1)) if b > 1 else 0.0
    return MomentEstimate(x0 + med, Z99 * MEDIAN_EFF * sd / math.sqrt(b), "median_of_means", True, v.size)


def expectation_norm_power(
    space: SpaceSpec,
    p_signed: float,
    samples,
    estimator: str = "auto",
    q: float | None = None,
    n_eff: int | None = None,
) -> MomentEstimate:
    """Estimate ``E||S||**p_signed`` from an (N, n) array or iterable of chunks.

    ``n_eff`` is the dimension of the sampled law (defaults to n); it decides
    integrability of negative moments and whether the CLT interval is honest.
    ``q`` enables the check that positive moments exist for stable laws.
    """
    if isinstance(samples, np.ndarray):
        chunks = [samples]
    else:
        chunks = list(samples)
    n_eff = space.n if n_eff is None else n_eff
    check_moment(p_signed, n_eff, q)
    vals = np.concatenate([space.norm(np.atleast_2d(c)) for c in chunks])
    with np.errstate(divide="ignore"):
        vals = vals**p_signed
    if estimator == "auto":
        estimator = choose_estimator(p_signed, n_eff)
    est = estimate_mean(vals, estimator)
    if estimator == "mean" and p_signed < 0 and -2 * p_signed >= n_eff:
        est = MomentEstimate(est.estimate, est.ci_half, est.estimator, True, est.n_samples)
    return est


def expected_direction(p_signed: float, q: float) -> str:
    """Direction of the X-versus-Y inequality predicted by theory."""
    if p_signed < 0:
        return "X>=Y"
    if p_signed <= q:
        return "X<=Y"
    if q == 2:
        return "X>=Y"
    raise MomentNotFiniteError("no moments beyond q for q < 2")


@dataclass
class StableExperimentReport:
    space: dict
    spec: dict
    p: float
    N: int
    seed: int
    partitions: int
    estimator: str
    heuristic_ci: bool
    ci_method: str
    rank_x: int
    rank_y: int
    E_X: float
    ci_X: float
    E_Y: float
    ci_Y: float
    direction: str
    verdict: str

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _partition_sizes(N: int, partitions: int) -> list[int]:
    base, extra = divmod(N, partitions)
    return [base + (1 if i < extra else 0) for i in range(partitions)]


def draw_xy(spec: StableSpec, N: int, seed: int, partitions: int = 1):
    """Deterministic X and Y samples from disjoint streams."""
    xs, ys = [], []
    for part, size in enumerate(_partition_sizes(N, partitions)):
        xs.append(sample_X(spec, stream(seed, STREAM_X, part), size))
        ys.append(sample_Y(spec, stream(seed, STREAM_Y1, part), size, stream(seed, STREAM_Y2, part)))
    return np.vstack(xs), np.vstack(ys)


def compare(ex: MomentEstimate, ey: MomentEstimate, direction: str) -> str:
    lo_x, hi_x = ex.estimate - ex.ci_half, ex.estimate + ex.ci_half
    lo_y, hi_y = ey.estimate - ey.ci_half, ey.estimate + ey.ci_half
    if lo_x > hi_y:
        order = "X>=Y"
    elif lo_y > hi_x:
        order = "X<=Y"
    else:
        return "Inconclusive"
    return "InequalityHolds" if order == direction else "InequalityViolated"


def correlation_experiment(
    space: SpaceSpec,
    spec: StableSpec,
    p_signed: float,
    N: int,
    seed: int,
    estimator: str = "auto",
    partitions: int = 1,
    samples_out: dict | None = None,
) -> StableExperimentReport:
    """Compare ``E||X||**p`` with ``E||Y||**p`` using 99% intervals.

    The estimator choice uses the smaller of the two law dimensions so X and
    Y are treated alike.  Pass a dict as ``samples_out`` to receive the draws.
    """
    if space.n != spec.n:
        raise DomainError(f"space dimension {space.n} differs from spec dimension {spec.n}")
    if N < 2:
        raise DomainError("N must be at least 2")
    if not symmetry_check(space, spec.k, 200, seed):
        raise DomainError("space fails the block sign-flip symmetry")
    rx, ry = spec.rank_x(), spec.rank_y()
    n_eff = min(rx, ry)
    check_moment(p_signed, n_eff, spec.q)
    direction = expected_direction(p_signed, spec.q)
    if estimator == "auto":
        estimator = choose_estimator(p_signed, n_eff)
    X, Y = draw_xy(spec, N, seed, partitions)
    if samples_out is not None:
        samples_out["X"], samples_out["Y"] = X, Y
    ex = expectation_norm_power(space, p_signed, X, estimator, spec.q, rx)
    ey = expectation_norm_power(space, p_signed, Y, estimator, spec.q, ry)
    heuristic = ex.heuristic or ey.heuristic
    ci_method = (
        "median of 64 block means, normal interval scaled by sqrt(pi/2)"
        if estimator == "median_of_means"
        else "sample mean, normal interval"
    ) + " at 99%"
    return StableExperimentReport(
        space=space.describe(),
        spec=spec.to_dict(),
        p=float(p_signed),
        N=int(N),
        seed=int(seed),
        partitions=int(partitions),
        estimator=estimator,
        heuristic_ci=heuristic,
        ci_method=ci_method,
        rank_x=rx,
        rank_y=ry,
        E_X=ex.estimate,
        ci_X=ex.ci_half,
        E_Y=ey.estimate,
        ci_Y=ey.ci_half,
        direction=direction,
        verdict=compare(ex, ey, direction),
    )


# ---------------------------------------------------------------- checks


def symmetry_check(space: SpaceSpec, k: int, trials: int = 100, seed: int = 0) -> bool:
    """True iff ``||(u, v)|| == ||(u, -v)||`` on random points (rel. 1e-12)."""
    n = space.n
    if not 1 <= k < n:
        raise DomainError(f"k must satisfy 1 <= k < n={n}")
    if isinstance(space, LqNorm):
        return True
    rng = stream(seed, 0x5E7)
    x = rng.standard_normal((trials, n))
    y = x.copy()
    y[:, k:] *= -1
    a, b = space.norm(x), space.norm(y)
    return bool(np.all(np.abs(a - b) <= 1e-12 * np.maximum(np.abs(a), np.abs(b))))


def _qq(v: np.ndarray, q: float) -> float:
    return float(np.sum(np.abs(v) ** q))


def clarkson_check(x, y, q: float, p: float) -> tuple[bool, bool, bool]:
    """Check the exponential, power-mean and Clarkson-type inequalities.

    Returns booleans for
    ``exp(-|x+y|^q) + exp(-|x-y|^q) >= 2 exp(-|x|^q - |y|^q)``,
    ``|x+y|^p + |x-y|^p <= 2 (|x|^q + |y|^q)^(p/q)`` (reversed when q=2, p>2) and
    ``|x+y|^q + |x-y|^q <= 2 (|x|^q + |y|^q)``, with q-norms over the coordinates.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    q, p = float(q), float(p)
    if not 0 < q <= 2:
        raise DomainError(f"q must lie in (0, 2], got {q}")
    reversed_ = q == 2 and p > 2
    if not (0 < p <= q or reversed_):
        raise DomainError("need 0 < p <= q, or q = 2 and p > 2")
    sp, sm, sx, sy = _qq(x + y, q), _qq(x - y, q), _qq(x, q), _qq(y, q)

    def ok(lhs, rhs):
        return (rhs - lhs) >= -1e-12 * max(1.0, abs(lhs), abs(rhs))

    c11 = ok(2 * math.exp(-sx - sy), math.exp(-sp) + math.exp(-sm))
    lhs12 = sp ** (p / q) + sm ** (p / q)
    rhs12 = 2 * (sx + sy) ** (p / q)
    c12 = ok(rhs12, lhs12) if reversed_ else ok(lhs12, rhs12)
    c13 = ok(sp + sm, 2 * (sx + sy))
    return c11, c12, c13
