import math

import numpy as np
import pytest

from negembed import quadrature
from negembed.config import NonConvergenceError


def test_smooth_integral():
    r = quadrature.adaptive(np.exp, [0.0, 1.0], rel_tol=1e-13)
    assert r.value == pytest.approx(math.e - 1, rel=1e-14)
    assert r.error < 1e-12


def test_kink_needs_breakpoint_or_refinement():
    f = lambda x: np.abs(x - 0.3)
    r = quadrature.adaptive(f, [0.0, 1.0], rel_tol=1e-10)
    assert abs(r.value - (0.045 + 0.245)) <= max(r.error, 1e-12) * 10
    r2 = quadrature.adaptive(f, [0.0, 0.3, 1.0], rel_tol=1e-12)
    assert r2.panels == 2
    assert r2.value == pytest.approx(0.29, rel=1e-14)


def test_oscillatory():
    r = quadrature.adaptive(lambda t: np.sin(50 * t), np.linspace(0, math.pi, 9), rel_tol=1e-12, abs_tol=1e-14)
    assert abs(r.value - (1 - math.cos(50 * math.pi)) / 50) < 1e-12


def test_multi_component():
    f = lambda t: np.vstack([np.cos(t), np.sin(t)])
    r = quadrature.adaptive(f, [0.0, math.pi / 2])
    assert r.value[0] == pytest.approx(1.0, rel=1e-12)
    assert r.value[1] == pytest.approx(1.0, rel=1e-12)


def test_budget_exhaustion_carries_estimate():
    with pytest.raises(NonConvergenceError) as info:
        quadrature.adaptive(lambda t: np.sin(1 / t), [1e-6, 1.0], rel_tol=1e-15, abs_tol=1e-18, max_panels=40)
    assert math.isfinite(info.value.estimate)


@pytest.mark.parametrize("s", [-0.7, -0.2, 0.5, 2.3])
def test_power_panel(s):
    v, err, _ = quadrature.power_panel(np.cos, 1.0, s)
    from scipy import integrate

    ref = integrate.quad(lambda t: t**s * math.cos(t), 0, 1, limit=200)[0]
    assert float(v) == pytest.approx(ref, rel=1e-9)
    assert err < 1e-10
