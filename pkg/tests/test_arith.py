import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lfmoments.arith import (
    build_tables,
    cached_tables,
    divisor_power_bound,
    factorize,
    is_prime,
    primitive_character_count,
)
from lfmoments.dirichlet import build_group

LIMIT = 2000


def naive_mobius(n):
    fac = factorize(n) if n > 1 else []
    if any(e > 1 for _, e in fac):
        return 0
    return (-1) ** len(fac)


def naive_totient(n):
    return sum(1 for k in range(1, n + 1) if math.gcd(k, n) == 1)


def naive_divisors(n):
    return [d for d in range(1, n + 1) if n % d == 0]


@pytest.fixture(scope="module")
def tables():
    return build_tables(LIMIT)


def test_tables_match_naive_definitions(tables):
    for n in range(1, 400):
        assert tables.mobius[n] == naive_mobius(n)
        assert tables.totient[n] == naive_totient(n)
        assert tables.divisor_count[n] == len(naive_divisors(n))
        assert tables.omega[n] == len(factorize(n) if n > 1 else [])
        assert tables.divisors(n) == naive_divisors(n)


def test_primes_and_smallest_factor(tables):
    primes = [p for p in range(2, LIMIT + 1) if is_prime(p)]
    assert list(tables.primes) == primes
    for n in range(2, LIMIT + 1):
        assert tables.spf[n] == factorize(n)[0][0]


def test_build_rejects_tiny_limit():
    with pytest.raises(ValueError):
        build_tables(1)


def test_factorize_outside_table_range(tables):
    with pytest.raises(ValueError):
        tables.factorize(LIMIT + 1)


@given(st.integers(1, 10**9))
def test_factorize_reconstructs(n):
    fac = factorize(n)
    assert math.prod(p**e for p, e in fac) == n
    assert all(is_prime(p) for p, _ in fac)
    assert [p for p, _ in fac] == sorted(p for p, _ in fac)


@given(st.integers(1, 44), st.integers(1, 44))
def test_mobius_and_totient_multiplicative(m, n):
    t = cached_tables(LIMIT)
    if math.gcd(m, n) == 1:
        assert t.mobius[m * n] == t.mobius[m] * t.mobius[n]
        assert t.totient[m * n] == t.totient[m] * t.totient[n]
        assert t.divisor_count[m * n] == t.divisor_count[m] * t.divisor_count[n]


@given(st.integers(1, LIMIT))
def test_totient_sums_over_divisors(n):
    t = cached_tables(LIMIT)
    assert sum(int(t.totient[d]) for d in t.divisors(n)) == n


def test_primitive_count_matches_enumeration():
    t = cached_tables(LIMIT)
    for q in range(1, 121):
        group = build_group(q)
        assert primitive_character_count(q, t) == len(group.primitive_index)


def test_primitive_count_vanishes_at_two_mod_four():
    t = cached_tables(LIMIT)
    assert all(primitive_character_count(q, t) == 0 for q in range(2, LIMIT, 4))


@pytest.mark.parametrize("r,delta", [(2, 0.5), (2, 0.25), (3, 0.5), (3, 0.25)])
def test_divisor_power_bound_holds(r, delta):
    const = divisor_power_bound(r, delta)
    for n in range(1, 20001):
        d_r = math.prod(math.comb(e + r - 1, r - 1) for _, e in (factorize(n) if n > 1 else []))
        assert d_r <= const * n**delta * (1 + 1e-12)


def test_divisor_power_bound_known_value():
    # for r = 2, delta = 1/2 only p = 2 (k = 1, 2: 2/sqrt 2, 3/2) and p = 3 (2/sqrt 3) contribute
    assert divisor_power_bound(2, 0.5) == pytest.approx(1.5 * 2 / math.sqrt(3), rel=1e-12)
