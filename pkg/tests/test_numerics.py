import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from spindec import numerics as nm
from spindec.errors import BracketError, DomainError


def test_gauss_kronrod_tables():
    np.testing.assert_allclose(nm.KRONROD_WEIGHTS.sum(), 2.0, rtol=1e-15)
    np.testing.assert_allclose(nm.GAUSS_WEIGHTS.sum(), 2.0, rtol=1e-15)
    x, _ = np.polynomial.legendre.leggauss(7)
    np.testing.assert_allclose(nm.KRONROD_NODES[nm.GAUSS_WEIGHTS > 0], x, atol=1e-15)


def test_exponential_tail():
    val, rep = nm.integrate_adaptive(lambda x: np.exp(-x), nm.Interval(0, math.inf, 1.0))
    assert abs(val - 1.0) < 1e-10
    assert rep.converged


def test_gamma_moment():
    # Γ(3)/2³
    val, _ = nm.integrate_adaptive(lambda x: x ** 2 * np.exp(-2 * x), nm.Interval(0, math.inf, 2.0))
    assert abs(val - 0.25) < 1e-10


def test_bessel_laplace_transform():
    f = lambda x: nm.bessel_j(0, x) * np.exp(-x)
    val, _ = nm.integrate_adaptive(f, nm.Interval(0, math.inf, 1.0))
    assert abs(val - 1 / math.sqrt(2)) < 1e-8


def test_complex_integrand_resolves_small_imaginary_part():
    f = lambda x: np.exp(-x) * (1 + 1e-9j * np.sin(x))
    val, _ = nm.integrate_adaptive(f, nm.Interval(0, math.inf, 1.0), nm.ToleranceSpec(rel=1e-10))
    np.testing.assert_allclose(val.imag, 0.5e-9, rtol=1e-8)


def test_vector_integrand():
    f = lambda x: np.stack([np.exp(-x), x * np.exp(-x)])
    val, _ = nm.integrate_adaptive(f, nm.Interval(0, math.inf, 1.0))
    np.testing.assert_allclose(val, [1.0, 1.0], rtol=1e-10)


@pytest.mark.parametrize("f, lo, hi, exact", [
    (lambda x: np.exp(-x), 0, math.inf, 1.0),
    (lambda x: np.cos(x) * np.exp(-x), 0, math.inf, 0.5),
    (lambda x: np.sqrt(x), 0, 1, 2 / 3),
    (lambda x: 1 / (1 + x * x), 0, 10, math.atan(10)),
    (lambda x: np.sin(20 * x) ** 2, 0, math.pi, math.pi / 2),
])
def test_error_estimate_is_conservative(f, lo, hi, exact):
    interval = nm.Interval(lo, hi, 1.0 if math.isinf(hi) else None)
    val, rep = nm.integrate_adaptive(f, interval, nm.ToleranceSpec(rel=1e-6))
    true_rel = abs(val - exact) / abs(exact)
    assert true_rel <= 10 * max(rep.rel_error, 1e-15)


def test_budget_exhaustion_flags_failure():
    f = lambda x: np.sign(np.sin(1 / np.maximum(x, 1e-12)))
    _, rep = nm.integrate_adaptive(f, nm.Interval(0, 1), nm.ToleranceSpec(rel=1e-12, max_evals=2000))
    assert not rep.converged


def test_quadrature_is_deterministic():
    f = lambda x: nm.bessel_j(1, 3 * x) * np.exp(-x)
    a, _ = nm.integrate_adaptive(f, nm.Interval(0, math.inf, 1.0))
    b, _ = nm.integrate_adaptive(f, nm.Interval(0, math.inf, 1.0))
    assert a == b


def test_interval_and_tolerance_validation():
    with pytest.raises(DomainError):
        nm.Interval(1, 0)
    with pytest.raises(DomainError):
        nm.Interval(0, math.inf)
    with pytest.raises(DomainError):
        nm.ToleranceSpec(rel=0, abs=0)
    with pytest.raises(DomainError):
        nm.ToleranceSpec(max_evals=0)


def test_bessel_at_zero():
    assert nm.bessel_j(0, 0.0) == 1.0
    assert nm.bessel_j(1, 0.0) == 0.0
    assert nm.bessel_j(2, 0.0) == 0.0


def test_bessel_recurrence():
    x = 3.7
    lhs = nm.bessel_j(0, x) + nm.bessel_j(2, x)
    assert abs(lhs - 2 * nm.bessel_j(1, x) / x) < 1e-12


def test_bessel_first_zero_by_own_bisection():
    root = nm.bisect(lambda x: nm.bessel_j(0, x), (2.0, 3.0), tol=1e-12)
    assert abs(root - 2.404826) < 1e-6


@pytest.mark.parametrize("n", [0, 1, 2])
def test_bessel_against_scipy(n):
    x = np.concatenate([np.linspace(0, 30, 3001), np.linspace(30, 1000, 5001)])
    np.testing.assert_allclose(nm.bessel_j(n, x), special.jv(n, x), rtol=0, atol=1e-13)


def test_bessel_domain():
    with pytest.raises(DomainError):
        nm.bessel_j(3, 1.0)
    with pytest.raises(DomainError):
        nm.bessel_j(0, -1.0)


def test_bisect_linear():
    assert abs(nm.bisect(lambda x: x - 1, (0, 2)) - 1) < 1e-12


def test_bisect_requires_sign_change():
    with pytest.raises(BracketError) as info:
        nm.bisect(lambda x: x * x + 1, (-1, 1))
    assert info.value.values == (2.0, 2.0)


def test_second_derivative_cubic():
    assert abs(nm.second_derivative(lambda x: x ** 3, 2.0, 1e-3) - 12) < 12e-8


@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5), st.floats(-3, 3))
def test_second_derivative_exact_on_quadratics(a, b, c, x):
    f = lambda t: a * t * t + b * t + c
    val = nm.second_derivative(f, x, 0.1)
    assert abs(val - 2 * a) <= 1e-10 * max(1.0, abs(2 * a)) + 1e-8 * (abs(b) + abs(c) + abs(a) * 10)


def test_loglog_slope_power_law():
    x = np.geomspace(1, 100, 7)
    slope, resid = nm.loglog_slope(x, 7 * x ** -2.0)
    assert abs(slope + 2) < 1e-12
    assert resid < 1e-12


@settings(max_examples=50)
@given(st.floats(-4, 4), st.floats(0.1, 100))
def test_loglog_slope_recovers_exponent(p, amp):
    x = np.geomspace(0.5, 20, 6)
    slope, _ = nm.loglog_slope(x, amp * x ** p)
    assert abs(slope - p) < 1e-10


def test_loglog_slope_rejects_nonpositive():
    with pytest.raises(DomainError):
        nm.loglog_slope([1, 2, 3], [1, 0, 2])
