import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from twrc_sim.numerics import (
    SeededStream,
    bessel_k0,
    bessel_k1,
    double_factorial_odd,
    draw_complex_gaussian,
    gaussian_q,
    integrate_fixed,
)


def q_by_quadrature(x):
    val, _ = integrate.quad(lambda t: math.exp(-t * t / 2), x, np.inf, epsabs=1e-14, epsrel=1e-13)
    return val / math.sqrt(2 * math.pi)


def bessel_by_quadrature(n, x):
    """K_n(x) = int_0^inf exp(-x cosh t) cosh(n t) dt, integrated numerically."""
    upper = np.arccosh(800.0 / x)
    peak = np.arccosh(max(1.0, 1.0 / x))
    pts = [peak] if 0 < peak < upper else None
    val, _ = integrate.quad(lambda t: np.exp(-x * np.cosh(t)) * np.cosh(n * t), 0, upper,
                            points=pts, limit=500, epsabs=0, epsrel=1e-13)
    return val


# -- Q function ---------------------------------------------------------------

def test_q_at_zero():
    assert gaussian_q(0.0) == 0.5


def test_q_far_tail_underflows():
    assert gaussian_q(40.0) < 1e-300


def test_q_196_matches_quadrature():
    oracle = q_by_quadrature(1.96)
    assert oracle == pytest.approx(0.0249979, abs=1e-7)
    assert gaussian_q(1.96) == pytest.approx(oracle, abs=1e-12)


@pytest.mark.parametrize("x", np.linspace(-8, 8, 33))
def test_q_absolute_error(x):
    assert abs(gaussian_q(x) - q_by_quadrature(x)) <= 1e-10


@given(st.floats(-30, 30))
def test_q_symmetry(x):
    assert gaussian_q(x) + gaussian_q(-x) == pytest.approx(1.0, abs=1e-10)


def test_q_strictly_decreasing():
    # below about -5 the value rounds to 1.0 in double precision
    xs = np.linspace(-5, 8, 2001)
    assert np.all(np.diff(gaussian_q(xs)) < 0)


# -- Bessel K0, K1 ----------------------------------------------------------

def test_k1_small_argument_limit():
    assert bessel_k1(1e-6) * 1e-6 == pytest.approx(1.0, rel=1e-3)


@pytest.mark.parametrize("x", [1e-4, 1e-5, 1e-6, 3e-7])
def test_k1_times_x_near_one(x):
    assert 0.999 <= bessel_k1(x) * x <= 1.001


@pytest.mark.parametrize("n,func", [(0, bessel_k0), (1, bessel_k1)])
def test_bessel_at_two_matches_integral(n, func):
    assert func(2.0) == pytest.approx(bessel_by_quadrature(n, 2.0), rel=1e-10)


@pytest.mark.parametrize("x", np.geomspace(1e-6, 50, 41))
def test_bessel_relative_error(x):
    assert bessel_k0(x) == pytest.approx(bessel_by_quadrature(0, x), rel=1e-8)
    assert bessel_k1(x) == pytest.approx(bessel_by_quadrature(1, x), rel=1e-8)


def test_k0_decreasing():
    assert bessel_k0(1) > bessel_k0(2) > bessel_k0(3)


def test_bessel_continuous_at_switch():
    lo, hi = np.nextafter(2.0, 0), np.nextafter(2.0, 3)
    assert bessel_k0(lo) == pytest.approx(bessel_k0(hi), rel=1e-13)
    assert bessel_k1(lo) == pytest.approx(bessel_k1(hi), rel=1e-13)


@pytest.mark.parametrize("bad", [0.0, -1.0, float("nan")])
def test_bessel_domain(bad):
    with pytest.raises(ValueError):
        bessel_k0(bad)
    with pytest.raises(ValueError):
        bessel_k1(bad)


# -- double factorial -------------------------------------------------------

def test_double_factorial_examples():
    assert double_factorial_odd(1) == 1
    assert double_factorial_odd(4) == 105
    loop = 1
    for k in range(1, 11):
        loop *= 2 * k - 1
    assert double_factorial_odd(10) == loop == 654729075


@pytest.mark.parametrize("n", range(1, 11))
def test_double_factorial_identity(n):
    assert double_factorial_odd(n) * math.factorial(n) * 2**n == math.factorial(2 * n)


def test_double_factorial_rejects():
    with pytest.raises(ValueError):
        double_factorial_odd(0)
    with pytest.raises(OverflowError):
        double_factorial_odd(400)


# -- random streams ---------------------------------------------------------

def test_complex_gaussian_mean_and_power():
    z = draw_complex_gaussian(SeededStream(1, (0,)), 1.0, 1_000_000)
    band = 4 * math.sqrt(0.5 / z.size)
    assert abs(z.real.mean()) < band and abs(z.imag.mean()) < band
    assert np.mean(np.abs(z) ** 2) == pytest.approx(1.0, abs=0.01)
    assert np.var(z.real) == pytest.approx(0.5, abs=0.01)


def test_complex_gaussian_deterministic():
    s = SeededStream(99, (3, 1, 4))
    np.testing.assert_array_equal(draw_complex_gaussian(s, 2.0, 500), draw_complex_gaussian(s, 2.0, 500))
    assert draw_complex_gaussian(s, 2.0) == draw_complex_gaussian(s, 2.0)


def test_sibling_streams_uncorrelated():
    root = SeededStream(2024)
    a = root.child(0).generator().standard_normal(100_000)
    b = root.child(1).generator().standard_normal(100_000)
    assert abs(np.corrcoef(a, b)[0, 1]) <= 0.01


def test_stream_rejects_bad_seed():
    with pytest.raises(ValueError):
        SeededStream(-1)
    with pytest.raises(ValueError):
        draw_complex_gaussian(SeededStream(0), 0.0, 3)


# -- quadrature -------------------------------------------------------------

def test_integrate_sine():
    assert integrate_fixed(np.sin, 0, math.pi) == pytest.approx(2.0, abs=1e-8)


def test_integrate_constant():
    assert integrate_fixed(lambda t: np.ones_like(t), 0, 1) == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("order", [2, 4, 8])
def test_integrate_craig_at_zero_snr(order):
    upper = (order - 1) * math.pi / order
    val = integrate_fixed(lambda t: np.exp(-0.0 / np.sin(t) ** 2), 0, upper) / math.pi
    assert val == pytest.approx((order - 1) / order, abs=1e-14)


@pytest.mark.parametrize("f", [np.exp, np.cos, lambda t: 1 / (1 + t * t), lambda t: np.exp(-2.0 / np.sin(t) ** 2)])
def test_integrate_64_vs_4096(f):
    coarse = integrate_fixed(f, 0.1, 2.5, 64)
    fine = integrate_fixed(f, 0.1, 2.5, 4096)
    assert coarse == pytest.approx(fine, rel=1e-8)


def test_integrate_errors():
    with pytest.raises(FloatingPointError), np.errstate(divide="ignore"):
        integrate_fixed(lambda t: 1 / (t - t), 0, 1)
    with pytest.raises(ValueError):
        integrate_fixed(np.sin, 1, 0)
    with pytest.raises(ValueError):
        integrate_fixed(np.sin, 0, 1, nodes=1)


@settings(max_examples=30)
@given(st.floats(0.0, 50.0))
def test_q_matches_quadrature_property(x):
    assert abs(gaussian_q(x) - q_by_quadrature(x)) < 1e-10
