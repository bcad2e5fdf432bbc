"""Contract tests for the special-function and quadrature layer.

mpmath serves as the independent oracle for Bessel values and reference
integrals; the Gauss-Kronrod rule is additionally checked against its
polynomial exactness degrees.
"""

import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oamfwm.errors import (MaxSubdivisionsExceeded, NonFinite, NoSignChange,
                           OutOfDomain, Overflow, QuadratureFailure)
from oamfwm.numerics import (MAX_BESSEL_ORDER, besselj, besselj_prime,
                             besselk, besselk_prime, find_root, integrate,
                             integrate_panels, kronrod_panels)

mpmath.mp.dps = 30

_ORDERS = [0, 1, 2, 3, 5, 8, 13, 21, 34, 64]
_ARGS = [1e-3, 0.5, 1.0, 2.404825557695773, 7.3, 19.0, 55.0, 120.0]


@pytest.mark.parametrize("order", _ORDERS)
def test_besselj_against_mpmath(order):
    for x in _ARGS:
        want = float(mpmath.besselj(order, x))
        got = float(besselj(order, x))
        assert got == pytest.approx(want, rel=1e-12, abs=1e-14)


@pytest.mark.parametrize("order", _ORDERS)
def test_besselj_prime_against_mpmath(order):
    for x in _ARGS:
        want = float(mpmath.besselj(order, x, derivative=1))
        got = float(besselj_prime(order, x))
        assert got == pytest.approx(want, rel=1e-12, abs=1e-14)


@pytest.mark.parametrize("order", _ORDERS)
def test_besselk_against_mpmath(order):
    for x in _ARGS:
        want = float(mpmath.besselk(order, x))
        got = float(besselk(order, x))
        assert got == pytest.approx(want, rel=1e-12, abs=1e-14)


@pytest.mark.parametrize("order", _ORDERS)
def test_besselk_prime_against_mpmath(order):
    # mpmath has no derivative flag for K; use the exact recurrence
    # K'_n = -(K_{n-1} + K_{n+1}) / 2 (with K_{-1} = K_1).
    for x in _ARGS:
        below = mpmath.besselk(abs(order - 1), x)
        above = mpmath.besselk(order + 1, x)
        want = float(-(below + above) / 2)
        got = float(besselk_prime(order, x))
        assert got == pytest.approx(want, rel=1e-12, abs=1e-14)


def test_bessel_vectorized_matches_scalar():
    x = np.array([0.3, 1.7, 9.2])
    vec = besselj(3, x)
    assert vec.shape == (3,)
    for xi, vi in zip(x, vec):
        assert vi == besselj(3, xi)


def test_bessel_domain_errors():
    with pytest.raises(OutOfDomain):
        besselj(MAX_BESSEL_ORDER + 1, 1.0)
    with pytest.raises(OutOfDomain):
        besselj(-1, 1.0)
    with pytest.raises(OutOfDomain):
        besselj(2.5, 1.0)
    with pytest.raises(OutOfDomain):
        besselj(0, -0.1)
    with pytest.raises(OutOfDomain):
        besselk(0, 0.0)
    with pytest.raises(OutOfDomain):
        besselk_prime(1, -2.0)


def test_besselk_overflow_is_reported():
    with pytest.raises(Overflow):
        besselk(64, 1e-300)


def test_besselk_underflow_is_accepted():
    assert besselk(0, 800.0) == 0.0


def test_find_root_polishes_bessel_zero():
    root = find_root(lambda x: float(besselj(0, x)), 2.0, 3.0)
    want = float(mpmath.besseljzero(0, 1))
    assert root == pytest.approx(want, abs=1e-12)


def test_find_root_error_taxonomy():
    with pytest.raises(NoSignChange):
        find_root(lambda x: 1.0 + x * x, -1.0, 1.0)
    with pytest.raises(NonFinite):
        find_root(lambda x: float("nan"), 0.0, 1.0)


def test_find_root_returns_exact_endpoint():
    assert find_root(lambda x: x, 0.0, 1.0) == 0.0


# The 15-point Kronrod rule integrates polynomials through degree 22
# exactly; its embedded 7-point Gauss rule through degree 13.  A single
# panel of each is probed via integrate() with a huge tolerance so no
# subdivision happens.
@pytest.mark.parametrize("degree", range(23))
def test_kronrod_polynomial_exactness(degree):
    nodes, weights = kronrod_panels(-1.0, 1.0, 1)
    got = float(weights @ nodes**degree)
    want = 0.0 if degree % 2 else 2.0 / (degree + 1)
    assert got == pytest.approx(want, abs=5e-14)


def test_kronrod_degree_23_is_inexact():
    nodes, weights = kronrod_panels(-1.0, 1.0, 1)
    err = abs(float(weights @ nodes**24) - 2.0 / 25.0)
    assert err > 1e-9


def test_panel_weights_sum_to_length():
    _, weights = kronrod_panels(-2.0, 7.0, 13)
    assert math.fsum(weights.tolist()) == pytest.approx(9.0, rel=1e-14)


def test_integrate_oscillatory_against_mpmath():
    val = integrate(lambda x: np.cos(7.0 * x) * np.exp(-x / 5.0),
                    0.0, 10.0 * math.pi, rtol=1e-12)
    want = float(mpmath.quad(
        lambda x: mpmath.cos(7 * x) * mpmath.exp(-x / 5),
        [0, 10 * mpmath.pi]))
    assert val.real == pytest.approx(want, rel=1e-11)
    assert val.imag == 0.0


def test_integrate_sharp_peak_refines():
    val = integrate(lambda x: 1.0 / ((x - 0.3) ** 2 + 1e-6),
                    0.0, 1.0, rtol=1e-10)
    want = float(mpmath.quad(
        lambda x: 1 / ((x - mpmath.mpf("0.3")) ** 2 + mpmath.mpf("1e-6")),
        [0, mpmath.mpf("0.3"), 1]))
    assert val.real == pytest.approx(want, rel=1e-9)


def test_integrate_complex_integrand():
    val = integrate(lambda x: np.exp(1j * x), 0.0, 1.0, rtol=1e-12)
    assert val == pytest.approx(
        complex(math.sin(1.0), 1.0 - math.cos(1.0)), rel=1e-12)


def test_integrate_budget_exhaustion_carries_estimate():
    with pytest.raises(MaxSubdivisionsExceeded) as excinfo:
        integrate(lambda x: np.sin(1.0 / (np.abs(x) + 1e-12)),
                  0.0, 1.0, rtol=1e-15, atol=0.0, max_subdivisions=5)
    estimate = excinfo.value.best_estimate
    assert isinstance(estimate, complex)
    assert abs(estimate) < 1.0
    assert excinfo.value.error_estimate > 0.0


def test_integrate_zero_width_interval():
    assert integrate(lambda x: np.exp(x), 2.0, 2.0) == 0.0


@given(st.integers(min_value=0, max_value=6),
       st.floats(min_value=-3.0, max_value=3.0),
       st.floats(min_value=0.1, max_value=4.0))
@settings(deadline=None, max_examples=60)
def test_integrate_monomials_hypothesis(degree, a, width):
    b = a + width
    val = integrate(lambda x: x**degree, a, b, rtol=1e-12)
    want = (b ** (degree + 1) - a ** (degree + 1)) / (degree + 1)
    assert val.real == pytest.approx(want, rel=1e-10, abs=1e-12)


def test_integrate_panels_vector_valued():
    freqs = np.array([1.0, 2.0, 5.0])

    def f(z):
        return np.exp(1j * freqs[:, None] * z[None, :])

    got = integrate_panels(f, 0.0, 2.0, rtol=1e-11)
    want = (np.exp(2j * freqs) - 1.0) / (1j * freqs)
    assert np.allclose(got, want, rtol=1e-10, atol=1e-13)


def test_integrate_panels_zero_interval_shape():
    got = integrate_panels(lambda z: np.ones((4, z.size)), 1.0, 1.0)
    assert got.shape == (4,)
    assert np.all(got == 0)


def test_integrate_panels_budget_error():
    with pytest.raises(QuadratureFailure):
        integrate_panels(lambda z: np.sin(1e4 * z)[None, :], 0.0, 1.0,
                         rtol=1e-12, atol=0.0, initial_panels=1,
                         max_doublings=1)


def test_kronrod_panels_rejects_bad_count():
    with pytest.raises(QuadratureFailure):
        kronrod_panels(0.0, 1.0, 0)
