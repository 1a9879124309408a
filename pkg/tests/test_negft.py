import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from negembed import negft, specfun
from negembed.config import DomainError, QuadratureConfig
from negembed.negft import LqNorm, SpectralSubspace

INF = math.inf


def agree(a, b, slack=1.0):
    return abs(a.value - b.value) <= slack * (a.err_estimate + b.err_estimate)


# ------------------------------------------------------------------ sign sums


def test_h_small_case_by_hand():
    assert negft.h_np(1, (1, 1)) == pytest.approx(4.0, abs=1e-14)


def test_h_sign_on_four_dims():
    xi = (1, 2, 0.5, 0.7)
    assert negft.h_np(2.5, xi) > 0
    assert negft.h_np(1.5, xi) < 0


def test_g_negative_exponent_signs():
    assert negft.g_np(-0.5, (3, 1, 1)) > 0
    assert negft.g_np(-0.5, (1, 3, 3)) < 0
    assert negft.g_np(2.5, (1, 1, 1)) > 0


def test_unsigned_sum_vanishes_in_odd_dimension():
    # flipping every sign negates the product of signs and keeps |sum|
    assert negft.h_np(-0.5, (3, 1, 1)) == 0.0
    assert negft.h_np(1.7, (0.2, 0.9, 1.4, 2.0, 0.6)) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("n,p", [(4, 0.3), (4, 0.7), (5, 0.3), (5, 1.5), (5, 1.8)])
def test_sign_change_witness_construction(n, p):
    small = (1e-2,) * (n - 3)
    a = negft.u_np(p, small + (3, 1, 1))
    b = negft.u_np(p, small + (1, 3, 3))
    assert a * b < 0


def test_u_selects_parity():
    xi = (1.0, 0.4, 2.0)
    assert negft.u_np(1.7, xi) == negft.g_np(1.7, xi)
    xi4 = (1.0, 0.4, 2.0, 0.3)
    assert negft.u_np(2.7, xi4) == negft.h_np(2.7, xi4)


def test_sign_sum_by_brute_force(rng):
    import itertools

    xi = rng.uniform(0.1, 2, 4)
    p = 1.37
    h = sum(np.prod(d) * abs(np.dot(d, xi)) ** p for d in itertools.product((-1, 1), repeat=4))
    g = sum(np.prod(d) * abs(np.dot(d, xi)) ** p * np.sign(np.dot(d, xi)) for d in itertools.product((-1, 1), repeat=4))
    assert negft.h_np(p, xi) == pytest.approx(h, rel=1e-12, abs=1e-13)
    assert negft.g_np(p, xi) == pytest.approx(g, rel=1e-12, abs=1e-13)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_sign_table_on_random_orthant_points(n):
    rng = np.random.default_rng(n)
    X = rng.uniform(1e-2, 1.0, (1000, n))
    with_sign = n % 2 == 1
    for p in np.linspace(n - 2, n, 7)[1:-1]:
        vals, errs = negft.sign_sum_batch(p, X, with_sign)
        assert np.all(vals > errs)
    if n >= 3:
        for p in np.linspace(n - 3, n - 2, 7)[1:-1]:
            if p <= 0:
                continue
            vals, errs = negft.sign_sum_batch(p, X, with_sign)
            assert np.all(vals < -errs)


# ---------------------------------------------------------------- closed form


def test_closed_one_dimension_reduces_to_power_constant():
    p, xi = 0.5, 2.0
    v = negft.ft_linf_closed(p, [xi])
    expect = 2 ** (1 - p) * math.sqrt(math.pi) * math.gamma((1 - p) / 2) / math.gamma(p / 2) * xi ** (p - 1)
    assert v.value == pytest.approx(expect, rel=1e-13)
    assert v.value == pytest.approx(specfun.c_p(-p) * xi ** (p - 1), rel=1e-13)
    assert v.method == "closed"


def test_closed_positive_in_positive_range():
    assert negft.ft_linf_closed(1.5, (1, 1, 1)).value > 0


def test_closed_sign_change_below_boundary():
    a = negft.ft_linf_closed(0.5, (1, 1, 1, 1)).value
    b = negft.ft_linf_closed(0.5, (1, 1e-3, 1e-3, 1e-3)).value
    assert a * b < 0


def test_closed_rejects_integer_and_zero():
    with pytest.raises(DomainError):
        negft.ft_linf_closed(2, (1, 1, 1))
    with pytest.raises(DomainError):
        negft.ft_linf_closed(1.5, (1, 0, 1))


def test_closed_batch_matches_scalar(rng):
    X = rng.uniform(0.1, 3, (20, 4))
    vals, errs = negft.ft_linf_closed_batch(2.3, X)
    for x, v, e in zip(X, vals, errs):
        one = negft.ft_linf_closed(2.3, x)
        assert v == pytest.approx(one.value, rel=1e-14)
        assert e == pytest.approx(one.err_estimate, rel=1e-12)


# --------------------------------------------------------- max-norm quadrature


def test_quadrature_matches_closed():
    xi = (0.7, 1.1, 2.3)
    a = negft.ft_linf_closed(1.3, xi)
    b = negft.ft_linf_quadrature(1.3, xi)
    assert agree(a, b)


def test_quadrature_integer_p_two_dims():
    # 4 * int_0^inf sin(t)^2 / t^2 dt = 2 pi
    v = negft.ft_linf_quadrature(1, (1, 1))
    assert math.isfinite(v.value)
    assert abs(v.value - 2 * math.pi) <= v.err_estimate + 1e-12


def test_quadrature_homogeneity():
    xi = np.array([0.9, 0.3, 1.7, 1.2])
    a = negft.ft_linf_quadrature(2.5, xi)
    b = negft.ft_linf_quadrature(2.5, 2 * xi)
    f = 2 ** (2.5 - 4)
    assert abs(b.value - f * a.value) <= 2 * (b.err_estimate + f * a.err_estimate)


@settings(max_examples=25)
@given(st.integers(2, 5), st.data())
def test_cross_method_closed_vs_quadrature(n, data):
    p = data.draw(st.floats(0.05, n - 0.05).filter(lambda v: abs(v - round(v)) > 0.02))
    xi = data.draw(st.lists(st.floats(0.05, 3.0), min_size=n, max_size=n))
    a = negft.ft_linf_closed(p, xi)
    b = negft.ft_linf_quadrature(p, xi)
    assert agree(a, b)


@settings(max_examples=25)
@given(st.permutations(range(4)), st.lists(st.sampled_from((-1.0, 1.0)), min_size=4, max_size=4))
def test_coordinate_symmetry(perm, signs):
    xi = np.array([0.3, 1.4, 0.8, 2.1])
    other = xi[list(perm)] * np.array(signs)
    for fn in (negft.ft_linf_closed, negft.ft_linf_quadrature):
        a, b = fn(2.2, xi), fn(2.2, other)
        assert abs(a.value - b.value) <= a.err_estimate + b.err_estimate
    a, b = negft.ft_lq_quadrature(3, 2.2, xi), negft.ft_lq_quadrature(3, 2.2, other)
    assert abs(a.value - b.value) <= a.err_estimate + b.err_estimate


@settings(max_examples=20)
@given(st.floats(0.2, 4.0), st.floats(0.05, 2.95).filter(lambda v: abs(v - round(v)) > 0.01))
def test_closed_homogeneity_property(lam, p):
    xi = np.array([0.4, 1.3, 0.9])
    a = negft.ft_linf_closed(p, xi)
    b = negft.ft_linf_closed(p, lam * xi)
    f = lam ** (p - 3)
    assert abs(b.value - f * a.value) <= 2 * (b.err_estimate + f * a.err_estimate)


# ------------------------------------------------------------ l_q quadrature


def test_lq_gaussian_case_is_riesz():
    xi = (1, 2, 2)
    v = negft.ft_lq_quadrature(2, 1.5, xi)
    ref = negft.riesz_transform(1.5, xi)
    assert v.value == pytest.approx(ref, rel=1e-6)


def test_riesz_formula_independent():
    # direct: 2^{n-p} pi^{n/2} Gamma((n-p)/2)/Gamma(p/2) |xi|^{p-n}
    n, p, xi = 3, 1.5, np.array([1.0, 2.0, 2.0])
    expect = 2 ** (n - p) * math.pi ** (n / 2) * math.gamma((n - p) / 2) / math.gamma(p / 2) * 3.0 ** (p - n)
    assert negft.riesz_transform(p, xi) == pytest.approx(expect, rel=1e-14)


def test_lq_positive_range_nonnegative():
    v = negft.ft_lq_quadrature(3, 4.2, (1, 1, 1, 1, 1))
    assert v.value >= -v.err_estimate


def test_lq_sign_change_below_boundary():
    a = negft.ft_lq_quadrature(3, 0.5, (1, 1, 1, 1, 1))
    b = negft.ft_lq_quadrature(3, 0.5, (1e-3, 1e-3, 1e-3, 1e-3, 1))
    assert (a.value > a.err_estimate and b.value < -b.err_estimate) or (
        a.value < -a.err_estimate and b.value > b.err_estimate
    )


def test_lq_homogeneity():
    xi = np.array([0.5, 1.0, 1.5])
    a = negft.ft_lq_quadrature(3, 1.7, xi)
    b = negft.ft_lq_quadrature(3, 1.7, 3 * xi)
    f = 3 ** (1.7 - 3)
    assert abs(b.value - f * a.value) <= 2 * (b.err_estimate + f * a.err_estimate)


@pytest.mark.parametrize("q", [1.0, 1.5])
def test_lq_small_q_positive(q):
    v = negft.ft_lq_quadrature(q, 1.2, (0.3, 1.0, 2.0))
    assert v.value > v.err_estimate


# ---------------------------------------------------------------- Monte Carlo


def test_mc_matches_lq_quadrature():
    a = negft.ft_lq_via_linf(3, 1.5, (1, 1, 2))
    b = negft.ft_lq_quadrature(3, 1.5, (1, 1, 2))
    assert agree(a, b)
    assert a.method == "lq_via_linf"


def test_mc_gaussian_case():
    xi = (0.5, 1.0, 1.5)
    a = negft.ft_lq_via_linf(2, 1.5, xi)
    assert abs(a.value - negft.riesz_transform(1.5, xi)) <= a.err_estimate


def test_mc_positive_four_dims():
    v = negft.ft_lq_via_linf(4, 2.5, (1, 1, 1, 1), QuadratureConfig(mc_samples=200_000))
    assert v.value > v.err_estimate


def test_mc_reproducible():
    cfg = QuadratureConfig(mc_samples=50_000, mc_seed=7)
    a = negft.ft_lq_via_linf(3, 1.5, (1, 2, 3), cfg)
    b = negft.ft_lq_via_linf(3, 1.5, (1, 2, 3), cfg)
    assert a == b


# -------------------------------------------------------------------- sphere


def test_sphere_euclidean_matches_riesz():
    xi = (0.3, -1.0, 0.8)
    v = negft.ft_sphere(LqNorm(2, 3), 2.5, xi)
    assert v.value == pytest.approx(negft.riesz_transform(2.5, xi), rel=1e-5)


def test_sphere_max_norm_matches_closed():
    xi = (1, 0.5, 2)
    a = negft.ft_sphere(LqNorm(INF, 3), 2.3, xi)
    b = negft.ft_linf_closed(2.3, xi)
    assert agree(a, b, slack=2.0) or a.value == pytest.approx(b.value, rel=1e-5)


def test_sphere_great_circle_case():
    # p = n-1 for the Euclidean plane: pi * (length of {theta orthogonal to xi}) = 2 pi
    v = negft.ft_sphere(LqNorm(2, 2), 1.0, (0.6, 0.8))
    assert v.value == pytest.approx(2 * math.pi, rel=1e-10)
    w = negft.ft_sphere(LqNorm(2, 3), 2.0, (0.0, 0.0, 1.0))
    assert w.value == pytest.approx(negft.riesz_transform(2.0, (0, 0, 1)), rel=1e-8)


def test_sphere_accepts_callable():
    norm = lambda x: np.sqrt((np.asarray(x) ** 2).sum(axis=-1))
    v = negft.ft_sphere(norm, 1.5, (1.0, 1.0), n=2)
    assert v.value == pytest.approx(negft.riesz_transform(1.5, (1, 1)), rel=1e-5)


@settings(max_examples=10)
@given(st.integers(0, 10_000), st.floats(2.0, 2.95))
def test_sphere_nonnegative_for_spectral_spaces(seed, p):
    rng = np.random.default_rng(seed)
    space = SpectralSubspace(rng.standard_normal((3, 5)), r=1.0)
    xi = rng.standard_normal(3)
    v = negft.ft_sphere(space, p, xi)
    assert v.value >= -v.err_estimate


def test_sphere_domain():
    with pytest.raises(DomainError):
        negft.ft_sphere(LqNorm(2, 3), 1.5, (1, 1, 1))
    with pytest.raises(DomainError):
        negft.ft_sphere(LqNorm(2, 3), 2.5, (0, 0, 0))


def test_spectral_rank_check():
    with pytest.raises(DomainError):
        SpectralSubspace(np.array([[1.0, 1.0], [2.0, 2.0]]), r=1)
    with pytest.raises(DomainError):
        SpectralSubspace(np.eye(2), r=2.5)


# ---------------------------------------------------------------- recurrence


@pytest.mark.parametrize("p,xi", [(2.5, (2, 1, 1)), (3.5, (3, 1, 1, 0.5)), (2.3, (1.5, 0.4, 0.9, 1.2))])
def test_recurrence_residual(p, xi):
    assert negft.u_recurrence_residual(p, xi) <= 1e-6 * abs(negft.u_np(p, xi)) + 1e-9


def test_recurrence_residual_scales_with_degree():
    xi = np.array([2.0, 1.0, 1.0])
    r1 = negft.u_recurrence_residual(2.5, xi)
    r2 = negft.u_recurrence_residual(2.5, 2 * xi)
    bound = 1e-6 * abs(negft.u_np(2.5, xi)) + 1e-9
    assert r2 / 2**2.5 <= bound


def test_recurrence_domain():
    with pytest.raises(DomainError):
        negft.u_recurrence_residual(2.5, (1, 1, 2))
    with pytest.raises(DomainError):
        negft.u_recurrence_residual(2.0, (2, 1, 1))


def test_sphere_l1_matches_lq_quadrature():
    xi = (0.3, -1.0, 0.8)
    a = negft.ft_sphere(LqNorm(1, 3), 2.5, xi)
    b = negft.ft_lq_quadrature(1, 2.5, xi)
    assert agree(a, b)


def test_sphere_converges_with_crossing_cusps():
    # r < 1 makes every atom hyperplane a cusp; three of them cross pairwise
    atoms = np.array([[0.9, -0.4, 1.2], [0.3, 1.1, -0.7], [-1.0, 0.2, 0.5]])
    space = SpectralSubspace(atoms, r=0.73)
    for p in (2.5, 2.9):
        v = negft.ft_sphere(space, p, (0.4, -0.8, 1.1))
        assert v.converged and v.value > v.err_estimate
