import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from negembed import stablesim
from negembed.config import DomainError, MomentNotFiniteError
from negembed.negft import LqNorm, SpectralSubspace
from negembed.stablesim import StableSpec

INF = math.inf


def ecf(samples, t):
    return float(np.mean(np.cos(t * samples)))


def test_gaussian_variance():
    u = stablesim.sample_standard_stable(2.0, stablesim.stream(1, 9), 1_000_000)
    assert abs(np.var(u) - 2.0) <= 0.01


@pytest.mark.parametrize("t", [0.5, 1.0, 2.0])
def test_cauchy_characteristic_function(t):
    N = 200_000
    u = stablesim.sample_standard_stable(1.0, stablesim.stream(2, 9), N)
    assert abs(ecf(u, t) - math.exp(-t)) <= 3 / math.sqrt(N)


@pytest.mark.parametrize("q", [0.5, 0.9, 1.3, 1.7, 2.0])
def test_characteristic_function_any_q(q):
    N = 100_000
    u = stablesim.sample_standard_stable(q, stablesim.stream(3, int(q * 10)), N)
    for t in (0.3, 1.0, 1.8):
        assert abs(ecf(u, t) - math.exp(-(t**q))) <= 3 / math.sqrt(N)
    # symmetric: the median sits at zero within a binomial interval
    assert abs(np.mean(u > 0) - 0.5) <= 3 * 0.5 / math.sqrt(N)


def test_sampler_domain():
    with pytest.raises(DomainError):
        stablesim.sample_standard_stable(2.5, stablesim.stream(0, 0), 3)


def test_streams_are_keyed():
    a = stablesim.stream(5, 1, 0).random(4)
    assert np.array_equal(a, stablesim.stream(5, 1, 0).random(4))
    assert not np.array_equal(a, stablesim.stream(5, 2, 0).random(4))
    assert not np.array_equal(a, stablesim.stream(5, 1, 1).random(4))


def test_spec_validation():
    with pytest.raises(DomainError):
        StableSpec(1.5, np.eye(3), 3)
    with pytest.raises(DomainError):
        StableSpec(2.5, np.eye(3), 1)
    spec = StableSpec(1.5, stablesim.coupled_atoms(4), 2)
    # cyclic coupling in even dimension has rank n-1; the decoupled law has rank n
    assert spec.rank_x() == 3 and spec.rank_y() == 4


def test_coupled_preset_layout():
    s = stablesim.coupled_atoms(4)
    assert s.tolist() == [[1, 1, 0, 0], [0, 1, 1, 0], [0, 0, 1, 1], [1, 0, 0, 1]]


def test_X_characteristic_function():
    N = 100_000
    spec = StableSpec(1.5, stablesim.coupled_atoms(4), 2)
    X = stablesim.sample_X(spec, stablesim.stream(11, 1), N)
    rng = np.random.default_rng(0)
    for xi in rng.standard_normal((5, 4)) * 0.7:
        assert abs(ecf(X @ xi, 1.0) - math.exp(spec.log_cf_x(xi))) <= 3 / math.sqrt(N)


def test_Y_characteristic_function_and_blocks():
    N = 100_000
    spec = StableSpec(1.2, stablesim.coupled_atoms(4), 2)
    Y = stablesim.sample_Y(spec, stablesim.stream(12, 2), N, stablesim.stream(12, 3))
    X = stablesim.sample_X(spec, stablesim.stream(12, 1), N)
    rng = np.random.default_rng(1)
    for xi in rng.standard_normal((5, 4)) * 0.7:
        assert abs(ecf(Y @ xi, 1.0) - math.exp(spec.log_cf_y(xi))) <= 3 / math.sqrt(N)
        for block in (slice(0, 2), slice(2, 4)):
            z = np.zeros(4)
            z[block] = xi[block]
            assert abs(ecf(Y @ z, 1.0) - ecf(X @ z, 1.0)) <= 6 / math.sqrt(N)


def test_Y_blocks_independent():
    N = 100_000
    spec = StableSpec(1.5, stablesim.coupled_atoms(4), 2)
    Y = stablesim.sample_Y(spec, stablesim.stream(13, 2), N, stablesim.stream(13, 3))
    a, b = Y[:, 1] > 0, Y[:, 2] > 0
    joint, prod = np.mean(a & b), np.mean(a) * np.mean(b)
    assert abs(joint - prod) <= 4 * math.sqrt(0.25 * 0.75 / N)
    # the coupled X shares atom 2 between coordinates 1 and 2
    X = stablesim.sample_X(spec, stablesim.stream(13, 1), N)
    assert np.mean((X[:, 1] > 0) & (X[:, 2] > 0)) - 0.25 > 10 * math.sqrt(0.25 * 0.75 / N)


def test_sign_flip_law_invariance():
    N = 100_000
    spec = StableSpec(1.5, stablesim.coupled_atoms(4), 2)
    space = LqNorm(3, 4)
    a = stablesim.sample_X(spec, stablesim.stream(21, 1), N)
    b = stablesim.sample_X(spec, stablesim.stream(21, 4), N)
    b[:, 2:] *= -1
    res = stats.ks_2samp(space.norm(a), space.norm(b))
    crit = 1.628 * math.sqrt(2 / N)
    assert res.statistic < crit


# ------------------------------------------------------------- estimation


def test_gaussian_chi_mean():
    N = 400_000
    spec = StableSpec(2, np.eye(3), 1)
    X = stablesim.sample_X(spec, stablesim.stream(31, 1), N)
    est = stablesim.expectation_norm_power(LqNorm(2, 3), 1.0, X, q=2)
    exact = math.sqrt(2) * math.sqrt(2) * math.gamma(2) / math.gamma(1.5)
    assert exact == pytest.approx(4 / math.sqrt(math.pi))
    assert abs(est.estimate - exact) <= est.ci_half
    assert not est.heuristic


def test_negative_moment_clt_regime():
    spec = StableSpec(2, np.eye(3), 1)
    X = stablesim.sample_X(spec, stablesim.stream(32, 1), 200_000)
    est = stablesim.expectation_norm_power(LqNorm(2, 3), -1.0, X, q=2)
    assert est.estimator == "mean" and not est.heuristic
    # E|X|^-1 for N(0, 2 I_3): Gamma(1)/(sqrt(2) Gamma(1.5)) / sqrt(2)
    exact = math.gamma(1.0) / (math.sqrt(2) * math.gamma(1.5)) / math.sqrt(2)
    assert abs(est.estimate - exact) <= est.ci_half


def test_heavy_negative_moment_uses_median_of_means():
    spec = StableSpec(2, np.eye(3), 1)
    X = stablesim.sample_X(spec, stablesim.stream(33, 1), 20_000)
    est = stablesim.expectation_norm_power(LqNorm(2, 3), -2.0, X)
    assert est.estimator == "median_of_means" and est.heuristic


def test_moment_nonexistence():
    X = np.ones((10, 3))
    with pytest.raises(MomentNotFiniteError):
        stablesim.expectation_norm_power(LqNorm(2, 3), 1.5, X, q=1.0)
    with pytest.raises(MomentNotFiniteError):
        stablesim.expectation_norm_power(LqNorm(2, 3), -3.0, X)


@given(
    st.lists(st.floats(-5, 5).filter(lambda v: abs(v) > 1e-3), min_size=3, max_size=3),
    st.sampled_from([-1.0, -0.5, 0.5, 1.0, 2.0]),
    st.sampled_from(["mean", "median_of_means"]),
)
def test_constant_stream_is_exact(v, p, estimator):
    space = LqNorm(1.5, 3)
    X = np.tile(v, (200, 1))
    est = stablesim.expectation_norm_power(space, p, X, estimator)
    assert est.estimate == (space.norm(X[:1]) ** p)[0]
    assert est.ci_half == 0.0


# ------------------------------------------------------------ experiments


def test_max_norm_negative_moment_experiment():
    spec = StableSpec(1.5, stablesim.coupled_atoms(4), 2)
    r = stablesim.correlation_experiment(LqNorm(INF, 4), spec, -1.5, 200_000, 42)
    assert r.verdict == "InequalityHolds"
    assert r.E_X >= r.E_Y
    # the coupled law lives on a 3-dim subspace, so 2p >= 3 and the variance is infinite
    assert r.rank_x == 3
    assert r.estimator == "median_of_means" and r.heuristic_ci


def test_euclidean_high_moment_experiment():
    spec = StableSpec(2, stablesim.coupled_atoms(3), 1)
    r = stablesim.correlation_experiment(LqNorm(2, 3), spec, 3.0, 200_000, 42)
    assert r.direction == "X>=Y"
    assert r.verdict == "InequalityHolds"


def test_l1_first_moment_depends_only_on_marginals():
    # E||X||_1 is a sum of coordinate means, and X, Y share coordinate laws,
    # so the two estimates agree within their intervals
    spec = StableSpec(2, stablesim.coupled_atoms(3), 1)
    r = stablesim.correlation_experiment(LqNorm(1, 3), spec, 1.0, 200_000, 42)
    assert r.direction == "X<=Y"
    assert abs(r.E_X - r.E_Y) <= r.ci_X + r.ci_Y
    exact = 3 * math.sqrt(2) * 2 / math.sqrt(math.pi)
    assert abs(r.E_X - exact) <= r.ci_X


def test_experiment_reproducible():
    spec = StableSpec(1.5, stablesim.coupled_atoms(4), 2)
    a = stablesim.correlation_experiment(LqNorm(3, 4), spec, -1.0, 20_000, 9, partitions=3)
    b = stablesim.correlation_experiment(LqNorm(3, 4), spec, -1.0, 20_000, 9, partitions=3)
    assert a == b
    assert a.partitions == 3


def test_experiment_rejects_asymmetric_space():
    atoms = np.array([[1.0, 1.0, 0.0], [1.0, -1.0, 0.5], [0.0, 0.3, 1.0]])
    space = SpectralSubspace(atoms, r=1.0)
    spec = StableSpec(1.5, np.eye(3), 1)
    with pytest.raises(DomainError):
        stablesim.correlation_experiment(space, spec, -1.0, 1000, 0)


def test_experiment_regime_error():
    spec = StableSpec(1.0, np.eye(3), 1)
    with pytest.raises(MomentNotFiniteError, match="q=1"):
        stablesim.correlation_experiment(LqNorm(2, 3), spec, 1.5, 1000, 0)


# ----------------------------------------------------------------- checks


@pytest.mark.parametrize("q", [0.7, 1.0, 2.0, 3.5, INF])
@pytest.mark.parametrize("n,k", [(2, 1), (4, 1), (4, 3)])
def test_symmetry_for_lq(q, n, k):
    assert stablesim.symmetry_check(LqNorm(q, n), k)


def test_symmetry_detects_mixed_blocks():
    atoms = np.array([[1.0, 1.0, 0.0], [1.0, -1.0, 0.5], [0.0, 0.3, 1.0]])
    space = SpectralSubspace(atoms, r=1.0)
    x = np.array([1.0, 0.1, 0.1])
    assert space.norm(x) != pytest.approx(space.norm(x * np.array([1, -1, -1])))
    assert not stablesim.symmetry_check(space, 1)
    # block-diagonal atoms keep the symmetry
    block = SpectralSubspace(np.array([[1.0, 2.0, 0.0], [0.0, 0.0, 1.0]]), r=1.5)
    assert stablesim.symmetry_check(block, 1)


def test_clarkson_equal_vectors():
    x = np.array([0.3, -1.2, 2.0])
    assert all(stablesim.clarkson_check(x, x, 1.5, 1.0))
    sx = float(np.sum(np.abs(x) ** 1.5))
    assert 2**1.5 * sx <= 4 * sx


def test_clarkson_reversal_at_two():
    rng = np.random.default_rng(4)
    x, y = rng.standard_normal(6), rng.standard_normal(6)
    c11, c12, c13 = stablesim.clarkson_check(x, y, 2, 3)
    assert c11 and c12 and c13
    # the unreversed power-mean inequality fails in that regime
    sp, sm = np.sum((x + y) ** 2), np.sum((x - y) ** 2)
    sx, sy = np.sum(x**2), np.sum(y**2)
    assert sp**1.5 + sm**1.5 > 2 * (sx + sy) ** 1.5


@settings(max_examples=200)
@given(
    st.integers(1, 6).flatmap(
        lambda m: st.tuples(
            st.lists(st.floats(-3, 3), min_size=m, max_size=m),
            st.lists(st.floats(-3, 3), min_size=m, max_size=m),
        )
    ),
    st.floats(0.1, 2.0),
    st.floats(0.01, 1.0),
)
def test_clarkson_property(xy, q, frac):
    x, y = xy
    assert all(stablesim.clarkson_check(x, y, q, frac * q))


def test_exponential_inequality_bulk():
    rng = np.random.default_rng(5)
    for _ in range(10_000):
        m = int(rng.integers(1, 6))
        q = float(rng.uniform(0.05, 2.0))
        x, y = rng.standard_normal(m) * rng.uniform(0, 2), rng.standard_normal(m) * rng.uniform(0, 2)
        assert stablesim.clarkson_check(x, y, q, q)[0]


def test_clarkson_domain():
    with pytest.raises(DomainError):
        stablesim.clarkson_check([1], [1], 1.5, 2.0)
    with pytest.raises(DomainError):
        stablesim.clarkson_check([1], [1], 2.5, 1.0)
