import cmath
import math

import mpmath
import numpy as np
import pytest
import scipy.special as sc
from hypothesis import given, settings
from hypothesis import strategies as st

from lfmoments.special import (
    digamma,
    euler_H,
    euler_H_log_derivative,
    log_gamma,
    rankin_selberg_L,
    richardson_derivative,
    sym_square_coefficients,
    sym_square_completed,
    sym_square_L,
    sym_square_L_derivative_ratio,
    sym_square_value,
    zeta,
)

EULER_GAMMA = 0.5772156649015329

strip = st.builds(complex, st.floats(0.1, 10), st.floats(-50, 50))


@settings(max_examples=100)
@given(strip)
def test_log_gamma_recurrence(s):
    lhs = log_gamma(s + 1) - log_gamma(s) - cmath.log(s)
    # branches of log may differ by 2 pi i
    k = round(lhs.imag / (2 * math.pi))
    assert abs(lhs - 2j * math.pi * k) < 1e-12


@settings(max_examples=100)
@given(strip)
def test_log_gamma_against_scipy(s):
    assert log_gamma(s) == pytest.approx(complex(sc.loggamma(s)), rel=1e-12, abs=1e-12)


@settings(max_examples=100)
@given(strip)
def test_digamma_against_scipy(s):
    assert digamma(s) == pytest.approx(complex(sc.psi(s)), rel=1e-11, abs=1e-12)


def test_log_gamma_vectorized_and_poles():
    z = np.array([0.5, 1.0, 2.0 + 3.0j])
    assert np.allclose(log_gamma(z), sc.loggamma(z), rtol=1e-13)
    assert log_gamma(1.0) == pytest.approx(0.0, abs=1e-14)
    assert log_gamma(0.5).real == pytest.approx(0.5 * math.log(math.pi), rel=1e-14)
    with pytest.raises(ValueError):
        log_gamma(-2.0)


def test_digamma_at_one():
    assert digamma(1.0).real == pytest.approx(-EULER_GAMMA, abs=1e-14)


@pytest.mark.parametrize("s", [0.0, 2.0, 3.0, -1.5, 0.5 + 14.134725j, 0.3 + 40j, -3 + 2j, 1.0001])
def test_zeta_against_mpmath(s):
    assert zeta(s) == pytest.approx(complex(mpmath.zeta(s)), rel=1e-12, abs=1e-12)


def test_zeta_special_values():
    assert zeta(0) == pytest.approx(-0.5, abs=1e-15)
    assert zeta(2) == pytest.approx(math.pi**2 / 6, rel=1e-15)
    with pytest.raises(ValueError):
        zeta(1)


def test_sym_square_coefficients_divisor_identity(small_coeffs):
    lam = small_coeffs.lam
    limit = 140
    c = sym_square_coefficients(small_coeffs, limit)
    for n in range(1, limit + 1):
        oracle = sum(lam[(n // (d * d)) ** 2] for d in range(1, int(math.isqrt(n)) + 1) if n % (d * d) == 0)
        assert c[n] == pytest.approx(oracle, rel=1e-11, abs=1e-12)


def test_sym_square_at_three_matches_direct_series(coeffs):
    c = sym_square_coefficients(coeffs, 100_000)
    n = np.arange(1, 100_001, dtype=float)
    direct = math.fsum(c[1:] * n**-3.0)
    assert sym_square_L(3.0, coeffs).real == pytest.approx(direct, abs=1e-8)


def test_sym_square_balance_independence(coeffs):
    s = 0.4 + 1.3j
    v1 = sym_square_L(s, coeffs, balance=1.0)
    v2 = sym_square_L(s, coeffs, balance=1.7)
    assert abs(v1 - v2) < 1e-10


def test_sym_square_functional_equation_point(coeffs):
    s = 0.3 + 0.7j
    a, b = sym_square_completed(s, coeffs), sym_square_completed(1 - s, coeffs)
    assert abs(a - b) / max(abs(a), abs(b)) < 1e-8


def test_sym_square_value_certificates(coeffs):
    v = sym_square_value(0.5, coeffs)
    assert v.truncation_error < 1e-12
    assert v.quadrature_error < 1e-8
    assert v.lengths[0] >= 1


def test_richardson_on_elementary_function():
    est = richardson_derivative(math.exp, 1.0)
    assert est.raw == pytest.approx(math.e, rel=1e-9)
    assert est.ratio == pytest.approx(1.0, rel=1e-9)
    assert est.certificate < 1e-8


def test_derivative_machinery_at_three(coeffs):
    # term-wise oracle: L'/L(3) = -sum c_n log n n^-3 / sum c_n n^-3
    c = sym_square_coefficients(coeffs, 100_000)
    n = np.arange(1, 100_001, dtype=float)
    oracle = -math.fsum(c[1:] * np.log(n) * n**-3.0) / math.fsum(c[1:] * n**-3.0)
    est = richardson_derivative(lambda x: sym_square_L(x, coeffs).real, 3.0)
    assert est.ratio == pytest.approx(oracle, rel=1e-7)


def test_sym_square_log_derivative_at_one(coeffs):
    est = sym_square_L_derivative_ratio(coeffs)
    assert est.value == pytest.approx(0.6317929457, rel=1e-8)
    assert est.certificate < 1e-7
    assert est.ratio == pytest.approx(est.raw / est.value)


def test_rankin_selberg_series_identity(coeffs):
    # sum lambda^2 n^-s = zeta(s) L(s, sym^2 f) / zeta(2s)
    n = np.arange(1, 100_001, dtype=float)
    direct = math.fsum(coeffs.lam[1:100_001] ** 2 * n**-3.0)
    assert rankin_selberg_L(3.0, coeffs).real == pytest.approx(direct, abs=1e-8)


def _diagonal_ratio(lam, p, s, N=100_000):
    """sum_n lambda(pn) lambda(n) n^-s / sum_n lambda(n)^2 n^-s, both over n <= N / p."""
    n = np.arange(1, N // p + 1)
    w = n.astype(float) ** (-s)
    return np.sum(lam[p * n] * lam[n] * w) / np.sum(lam[n] ** 2 * w)


@pytest.mark.parametrize("a", [2, 3, 4])
@pytest.mark.parametrize("s", [2.0, 2.0 + 0.5j])
def test_euler_H_standard_reading_matches_diagonal_ratio(coeffs, a, s):
    ratio = _diagonal_ratio(coeffs.lam, a, s)
    H = euler_H(s, 1, a, 1, coeffs).product
    assert abs(H - ratio) < 1e-6


def test_euler_H_literal_reading_is_undefined_off_integers(coeffs):
    with pytest.raises(ValueError, match="not a non-negative integer"):
        euler_H(2.0 + 0.5j, 1, 2, 1, coeffs, reading="literal")
    with pytest.raises(ValueError):
        euler_H(1.5, 1, 3, 1, coeffs, reading="literal")


@pytest.mark.parametrize("a", [2, 3])
def test_euler_H_literal_reading_disagrees_at_integer_s(coeffs, a):
    ratio = _diagonal_ratio(coeffs.lam, a, 2.0)
    literal = euler_H(2.0, 1, a, 1, coeffs, reading="literal").product
    assert abs(literal - ratio) > 1e-2


def test_euler_H_is_symmetric_and_multiplicative(coeffs):
    s = 1.3 + 0.2j
    h23 = euler_H(s, 1, 2, 3, coeffs).product
    assert euler_H(s, 1, 3, 2, coeffs).product == pytest.approx(h23, rel=1e-13)
    h2 = euler_H(s, 1, 2, 1, coeffs).product
    h3 = euler_H(s, 1, 3, 1, coeffs).product
    assert h23 == pytest.approx(h2 * h3, rel=1e-13)


def test_euler_H_rejects_common_factors(coeffs):
    with pytest.raises(ValueError):
        euler_H(2.0, 15, 3, 1, coeffs)
    with pytest.raises(ValueError):
        euler_H(2.0, 7, 2, 4, coeffs)


@pytest.mark.parametrize("q", [5, 101, 211])
def test_H_log_derivative_single_prime(coeffs, q):
    # H = (1 - l2 x + l2 x^2 - x^3) / (1 + x) with x = q^-s
    l2 = coeffs.lam[q * q] if q * q <= coeffs.limit else coeffs.prime_power(q, 2)
    x, L = q**-1.0, math.log(q)
    num = 1 - l2 * x + l2 * x * x - x**3
    dnum = (-l2 * x + 2 * l2 * x * x - 3 * x**3) * -L
    expected = dnum / num - (x * -L) / (1 + x)
    est = euler_H_log_derivative(q, 1, 1, coeffs)
    assert est.ratio == pytest.approx(expected, abs=1e-8)


def test_invalid_options(coeffs):
    with pytest.raises(ValueError):
        euler_H(2.0, 1, 1, 1, coeffs, normalization="other")
    with pytest.raises(ValueError):
        euler_H(2.0, 1, 1, 1, coeffs, reading="other")
