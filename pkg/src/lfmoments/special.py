"""Complex special functions: log-Gamma, digamma, zeta, L(s, sym^2 f) and H(s; q, a, b)."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .arith import MultiplicativeTables, factorize
from .contour import MellinKernel, truncation_length
from .errors import CapabilityError
from .hecke import CoefficientTable


@lru_cache(maxsize=1)
def _bernoulli(count: int = 40) -> tuple[Fraction, ...]:
    """B_0 .. B_{count-1} via the Akiyama-Tanigawa recurrence."""
    out = []
    a = [Fraction(0)] * (count + 1)
    for m in range(count):
        a[m] = Fraction(1, m + 1)
        for j in range(m, 0, -1):
            a[j - 1] = j * (a[j - 1] - a[j])
        out.append(a[0])
    # the recurrence yields B_1 = +1/2
    out[1] = Fraction(-1, 2)
    return tuple(out)


def _even_bernoulli(k: int) -> float:
    return float(_bernoulli()[2 * k])


_STIRLING = [_even_bernoulli(k) / (2 * k * (2 * k - 1)) for k in range(1, 13)]
_DIGAMMA = [_even_bernoulli(k) / (2 * k) for k in range(1, 13)]
_SHIFT_TO = 15.0


def _reject_poles(s) -> None:
    s = np.asarray(s)
    bad = (s.imag == 0) & (s.real <= 0) & (s.real == np.round(s.real))
    if np.any(bad):
        raise ValueError("Gamma has a pole at non-positive integers")


def _shift(s: np.ndarray):
    """Shift s upward to Re >= 15, returning (shifted s, list of skipped points)."""
    m = np.maximum(0, np.ceil(_SHIFT_TO - s.real)).astype(int)
    mmax = int(m.max()) if m.size else 0
    return s + m, m, mmax


def log_gamma(s):
    """Principal branch of log Gamma(s).

    Upward recurrence to Re s >= 15 followed by the Stirling series with 12
    Bernoulli terms; the recurrence subtracts principal logs, which keeps
    the result on the branch that is analytic off the negative real axis.
    Accepts scalars or numpy arrays.
    """
    scalar = np.ndim(s) == 0
    z = np.atleast_1d(np.asarray(s, dtype=complex))
    _reject_poles(z)
    w, m, mmax = _shift(z)
    correction = np.zeros_like(z)
    for k in range(mmax):
        active = k < m
        correction[active] += np.log(z[active] + k)
    inv = 1 / w
    inv2 = inv * inv
    series = np.zeros_like(z)
    p = inv
    for c in _STIRLING:
        series += c * p
        p = p * inv2
    out = (w - 0.5) * np.log(w) - w + 0.5 * math.log(2 * math.pi) + series - correction
    return complex(out[0]) if scalar else out


def digamma(s):
    """Gamma'/Gamma(s) by upward recurrence and the asymptotic series."""
    scalar = np.ndim(s) == 0
    z = np.atleast_1d(np.asarray(s, dtype=complex))
    _reject_poles(z)
    w, m, mmax = _shift(z)
    correction = np.zeros_like(z)
    for k in range(mmax):
        active = k < m
        correction[active] += 1 / (z[active] + k)
    inv2 = 1 / (w * w)
    series = np.zeros_like(z)
    p = inv2
    for c in _DIGAMMA:
        series += c * p
        p = p * inv2
    out = np.log(w) - 0.5 / w - series - correction
    return complex(out[0]) if scalar else out


def zeta(s: complex, cutoff: int | None = None, max_depth: int = 30) -> complex:
    """Riemann zeta by Euler-Maclaurin summation, reflected to Re s > 1 when Re s < 0.

    Args:
        s: any point except the pole s = 1.
        cutoff: number of direct terms N (default 30 + |Im s|).
        max_depth: maximal number of Bernoulli correction terms; the series
            stops once a correction falls below 1e-17 of the running value.
    """
    s = complex(s)
    if s == 1:
        raise ValueError("zeta has a pole at s = 1")
    if s.real < 0:
        # the direct sum cancels badly here; reflect to Re s > 1
        return complex(
            2**s * math.pi ** (s - 1) * cmath.sin(math.pi * s / 2) * np.exp(log_gamma(1 - s))
            * zeta(1 - s, cutoff, max_depth)
        )
    n_cut = cutoff or int(30 + abs(s.imag))
    n = np.arange(1, n_cut, dtype=float)
    head = np.exp(-s * np.log(n))
    total = complex(math.fsum(head.real), math.fsum(head.imag))
    big = float(n_cut)
    total += big ** (1 - s) / (s - 1) + 0.5 * big ** (-s)
    rising = s  # s (s+1) ... (s + 2k - 2)
    power = big ** (-s - 1)
    fact = 2.0  # (2k)!
    for k in range(1, max_depth + 1):
        term = _even_bernoulli(k) / fact * rising * power
        total += term
        if abs(term) < 1e-17 * max(abs(total), 1e-300):
            break
        rising *= (s + 2 * k - 1) * (s + 2 * k)
        power /= big * big
        fact *= (2 * k + 1) * (2 * k + 2)
    return total


# ---------------------------------------------------------------------------
# symmetric square


def sym_square_coefficients(coeffs: CoefficientTable, limit: int) -> np.ndarray:
    """c_n for n <= limit with sum c_n n^{-s} = L(s, sym^2 f).

    Built multiplicatively from c_{p^k} = lam(p^2)(c_{p^{k-1}} - c_{p^{k-2}}) + c_{p^{k-3}},
    which needs lambda_f(p) only for p <= limit.
    """
    if limit > coeffs.limit:
        raise CapabilityError(
            f"symmetric-square coefficients up to {limit} need lambda_f(p) for p <= {limit}; "
            f"table stops at {coeffs.limit}",
            required=limit,
        )
    c = _sym_square_cached(coeffs, limit)
    return c


@lru_cache(maxsize=4)
def _sym_square_cached(coeffs: CoefficientTable, limit: int) -> np.ndarray:
    from .arith import cached_tables

    tables = cached_tables(max(limit, 2))
    spf = tables.spf
    c = np.zeros(limit + 1)
    c[1] = 1.0
    lam = coeffs.lam
    for n in range(2, limit + 1):
        p = int(spf[n])
        m, pk = n, 1
        while m % p == 0:
            m //= p
            pk *= p
        if m > 1:
            c[n] = c[pk] * c[m]
            continue
        # n = p^k
        k = round(math.log(pk) / math.log(p))
        lp2 = lam[p] * lam[p] - 1.0
        c1 = c[n // p]
        c2 = c[n // p**2] if k >= 2 else 0.0
        c3 = c[n // p**3] if k >= 3 else 0.0
        c[n] = lp2 * (c1 - c2) + c3
    return c


def _sym_gamma_log(kappa: int):
    def log_gamma_factor(s):
        s = np.asarray(s, dtype=complex)
        return (
            -1.5 * s * math.log(math.pi)
            + log_gamma((s + 1) / 2)
            + log_gamma((s + kappa - 1) / 2)
            + log_gamma((s + kappa) / 2)
        )

    return log_gamma_factor


@dataclass(frozen=True)
class SymSquareValue:
    s: complex
    value: complex
    balance: float
    lengths: tuple[int, int]
    truncation_error: float
    quadrature_error: float


# damping of the symmetric-square weights; with a = 1 the certified sums run to
# ~10^6 terms, while a = 0.1 certifies the same accuracy with ~10^2
SYM_SQUARE_DAMPING = 0.1


def _sym_kernel(s: complex, kappa: int, damping: float, step: float) -> tuple[MellinKernel, float]:
    lg = _sym_gamma_log(kappa)
    base = lg(s)
    c = max(1.5, 1.5 - s.real, 0.5 + s.real)
    # Gamma((s+u+1)/2) has its first pole at u = -1 - s
    left = min(c, 0.5 * (1 + s.real))
    if left < 0.05:
        left = None
    kernel = MellinKernel(
        log_ratio=lambda u: lg(s + u) - base,
        scale=1.0,
        damping=damping,
        abscissa=c,
        left_abscissa=left,
        step=step,
    )
    return kernel, c


def sym_square_value(
    s: complex,
    coeffs: CoefficientTable,
    balance: float = 1.0,
    damping: float = SYM_SQUARE_DAMPING,
    step: float = 1.0 / 16,
    tol: float = 1e-13,
) -> SymSquareValue:
    """L(s, sym^2 f) from its smoothed approximate functional equation.

    L(s) = sum c_n n^{-s} V_s(n / X) + gamma(1-s)/gamma(s) sum c_n n^{s-1} V_{1-s}(n X),
    where gamma is the completed Gamma factor and the root number is 1.
    """
    s = complex(s)
    lg = _sym_gamma_log(coeffs.kappa)
    k1, _ = _sym_kernel(s, coeffs.kappa, damping, step)
    k2, _ = _sym_kernel(1 - s, coeffs.kappa, damping, step)
    n1, e1 = truncation_length(k1, s.real, 1 / balance, tol, divisor_order=3)
    n2, e2 = truncation_length(k2, 1 - s.real, balance, tol, divisor_order=3)
    need = max(n1, n2)
    if need > coeffs.limit:
        raise CapabilityError(f"L(s, sym^2 f) at s={s} needs {need} coefficients", required=need)
    c = sym_square_coefficients(coeffs, need)
    n = np.arange(1, need + 1, dtype=float)
    v1, q1 = k1.evaluate(n[:n1] / balance)
    v2, q2 = k2.evaluate(n[:n2] * balance)
    t1 = c[1 : n1 + 1] * np.exp(-s * np.log(n[:n1])) * v1
    t2 = c[1 : n2 + 1] * np.exp((s - 1) * np.log(n[:n2])) * v2
    ratio = np.exp(lg(1 - s) - lg(s))
    value = _fsum(t1) + complex(ratio) * _fsum(t2)
    return SymSquareValue(s, value, balance, (n1, n2), e1 + abs(ratio) * e2, max(q1, q2))


def sym_square_L(s: complex, coeffs: CoefficientTable, **kwargs) -> complex:
    return sym_square_value(s, coeffs, **kwargs).value


def sym_square_completed(s: complex, coeffs: CoefficientTable, **kwargs) -> complex:
    """Lambda(s, sym^2 f) = gamma(s) L(s, sym^2 f)."""
    lg = _sym_gamma_log(coeffs.kappa)
    return complex(np.exp(lg(s))) * sym_square_L(s, coeffs, **kwargs)


def _fsum(z: np.ndarray) -> complex:
    return complex(math.fsum(z.real), math.fsum(z.imag))


@dataclass(frozen=True)
class DerivativeEstimate:
    """Log derivative F'/F at a point with the raw derivative and its certificate."""

    point: float
    value: float  # F(point)
    raw: float  # F'(point)
    ratio: float  # F'(point) / F(point)
    step: float
    certificate: float  # |Richardson(h) - Richardson(h/2)|


def richardson_derivative(func, x0: float, h: float = 0.02) -> DerivativeEstimate:
    """F'(x0) from central differences at h, h/2, h/4 with one Richardson stage."""

    def central(step):
        return (func(x0 + step) - func(x0 - step)) / (2 * step)

    d1, d2, d4 = central(h), central(h / 2), central(h / 4)
    r1 = (4 * d2 - d1) / 3
    r2 = (4 * d4 - d2) / 3
    value = func(x0)
    return DerivativeEstimate(x0, value, r2, r2 / value, h, abs(r2 - r1))


def sym_square_L_derivative_ratio(coeffs: CoefficientTable, h: float = 0.02, **kwargs) -> DerivativeEstimate:
    """L'/L(1, sym^2 f) and L'(1, sym^2 f) by extrapolated central differences."""
    return richardson_derivative(lambda x: sym_square_L(x, coeffs, **kwargs).real, 1.0, h)


def rankin_selberg_L(s: complex, coeffs: CoefficientTable, **kwargs) -> complex:
    """sum lambda_f(n)^2 n^{-s} continued: zeta(s) L(s, sym^2 f) / zeta(2s)."""
    return zeta(s) * sym_square_L(s, coeffs, **kwargs) / zeta(2 * s)


# ---------------------------------------------------------------------------
# the correction factor H


NORMALIZATIONS = ("rankin_selberg", "zeta_sym2")
READINGS = ("standard", "literal")


@dataclass(frozen=True)
class EulerFactorH:
    s: complex
    q: int
    a: int
    b: int
    factors: tuple[tuple[int, complex], ...]
    product: complex
    normalization: str
    reading: str


def _check_coprime(q: int, a: int, b: int) -> None:
    if math.gcd(a, b) != 1 or math.gcd(a * b, q) != 1:
        raise ValueError(f"need (a,b) = (ab,q) = 1, got q={q}, a={a}, b={b}")


def _cubic(x: complex, l2: float) -> complex:
    return 1 - l2 * x + l2 * x * x - x**3


def _exponent(l: int, j: int, s: complex, reading: str) -> tuple[int, int]:
    if reading == "standard":
        return l + j, j
    js = j * s
    if abs(js.imag) > 1e-12 or abs(js.real - round(js.real)) > 1e-12:
        raise ValueError(
            f"literal reading needs lambda_f(p^(l + j s)) with j s = {js}; "
            "the exponent is not a non-negative integer, so the factor is undefined"
        )
    return l + round(js.real), round(js.real)


def twisted_local_sum(p: int, l: int, s: complex, coeffs: CoefficientTable, reading: str = "standard") -> complex:
    """sum_{j >= 0} lambda_f(p^{l+j}) lambda_f(p^j) p^{-j s}, cut when the tail is < 1e-14.

    The tail bound uses |lambda_f(p^m)| <= m + 1.
    """
    x = p ** (-complex(s))
    r = abs(x)
    if r >= 1:
        raise ValueError(f"local series at p={p} diverges for Re s = {complex(s).real}")
    terms = []
    j = 0
    while True:
        e1, e2 = _exponent(l, j, s, reading)
        terms.append(coeffs.prime_power(p, e1) * coeffs.prime_power(p, e2) * x**j)
        j += 1
        # sum_{i >= j} (l+i+1)(i+1) r^i, bounded by its first term times a geometric factor
        first = (l + j + 1) * (j + 1) * r**j
        growth = (l + j + 2) * (j + 2) / ((l + j + 1) * (j + 1)) * r
        if growth < 1 and first / (1 - growth) < 1e-14:
            break
        if j > 10_000:
            raise CapabilityError(f"local series at p={p} converges too slowly", required=j)
    return _fsum(np.array(terms, dtype=complex))


def local_H(p: int, l: int, s: complex, coeffs: CoefficientTable, divides_q: bool, normalization: str, reading: str):
    x = p ** (-complex(s))
    lp = coeffs.prime_power(p, 1)
    l2 = coeffs.prime_power(p, 2)
    if normalization == "rankin_selberg":
        prefix = _cubic(x, l2) / (1 + x)
    elif normalization == "zeta_sym2":
        prefix = (1 - lp * lp * x) * _cubic(x, l2)
    else:
        raise ValueError(f"normalization must be one of {NORMALIZATIONS}")
    if divides_q:
        return prefix
    return prefix * twisted_local_sum(p, l, s, coeffs, reading)


def euler_H(
    s: complex,
    q: int,
    a: int,
    b: int,
    coeffs: CoefficientTable,
    tables: MultiplicativeTables | None = None,
    normalization: str = "rankin_selberg",
    reading: str = "standard",
) -> EulerFactorH:
    """H(s; q, a, b) as a finite product of local factors.

    With ``normalization="rankin_selberg"`` the product satisfies
    sum_{(n,q)=1} lambda_f(an) lambda_f(bn) n^{-s} = L(s, f x f) H(s), where
    L(s, f x f) = zeta(s) L(s, sym^2 f) / zeta(2s).  With ``"zeta_sym2"`` the local
    factors are (1 - lambda_f(p)^2 p^{-s})(cubic) and the companion main term
    uses zeta(s) L(s, sym^2 f) alone.  ``reading="literal"`` evaluates
    lambda_f(p^{l + j s}) lambda_f(p^{j s}) and is only defined when j s is an
    integer.
    """
    if normalization not in NORMALIZATIONS:
        raise ValueError(f"normalization must be one of {NORMALIZATIONS}")
    if reading not in READINGS:
        raise ValueError(f"reading must be one of {READINGS}")
    _check_coprime(q, a, b)
    s = complex(s)
    factors = []
    for p, _ in (factorize(q) if q > 1 else []):
        factors.append((p, local_H(p, 0, s, coeffs, True, normalization, reading)))
    for n in (a, b):
        for p, l in (factorize(n) if n > 1 else []):
            factors.append((p, local_H(p, l, s, coeffs, False, normalization, reading)))
    factors.sort()
    product = complex(1.0)
    for _, f in factors:
        product *= f
    return EulerFactorH(s, q, a, b, tuple(factors), product, normalization, reading)


def euler_H_log_derivative(
    q: int,
    a: int,
    b: int,
    coeffs: CoefficientTable,
    tables: MultiplicativeTables | None = None,
    normalization: str = "rankin_selberg",
    h: float = 0.02,
) -> DerivativeEstimate:
    """H'/H(1) and H'(1) by extrapolated central differences."""
    return richardson_derivative(
        lambda x: euler_H(x, q, a, b, coeffs, tables, normalization).product.real, 1.0, h
    )
