import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lfmoments.arith import cached_tables
from lfmoments.dirichlet import (
    build_group,
    conductor_bruteforce,
    gauss_root_data,
    gauss_sum,
    primitive_twist_sum,
    primitive_twist_sum_bruteforce,
)

TABLES = cached_tables(1000)


def units(q):
    return [h for h in range(1, q + 1) if math.gcd(h, q) == 1]


@pytest.mark.parametrize("q", [1, 2, 3, 4, 8, 9, 12, 16, 25, 32, 45, 60, 64, 97])
def test_group_size_and_orthogonality(q):
    group = build_group(q)
    phi = int(TABLES.totient[q])
    assert len(group.characters) == phi
    vals = group.value_table()
    gram = vals @ vals.conj().T
    assert np.allclose(gram, phi * np.eye(phi), atol=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 80), st.integers(0, 10**6), st.integers(0, 10**6), st.data())
def test_characters_are_completely_multiplicative(q, m, n, data):
    group = build_group(q)
    chi = group.characters[data.draw(st.integers(0, len(group.characters) - 1))]
    assert chi(m * n) == pytest.approx(chi(m) * chi(n), abs=1e-12)
    assert chi(m) == pytest.approx(chi(m + q), abs=1e-12)
    if math.gcd(m, q) > 1:
        assert chi(m) == 0


def test_conductors_match_bruteforce():
    for q in range(1, 61):
        group = build_group(q)
        for chi in group.characters:
            assert chi.conductor == conductor_bruteforce(chi)


def test_conjugate_index():
    for q in (5, 12, 16, 35):
        group = build_group(q)
        for chi in group.characters:
            bar = chi.conjugate()
            for h in range(q):
                assert bar(h) == pytest.approx(chi(h).conjugate(), abs=1e-12)


def test_parity():
    for q in (7, 8, 15):
        group = build_group(q)
        for chi in group.characters:
            assert chi(q - 1) == pytest.approx(chi.parity, abs=1e-12)


def test_gauss_sum_matches_definition():
    for q in (7, 9, 20):
        group = build_group(q)
        for chi in group.characters:
            direct = sum(chi(h) * cmath.exp(2j * math.pi * h / q) for h in range(q))
            assert gauss_sum(chi) == pytest.approx(direct, abs=1e-10)


@pytest.mark.parametrize("q", [5, 7, 11, 13, 16, 25, 27, 40, 49])
def test_primitive_gauss_modulus_and_root_numbers(q):
    group = build_group(q)
    for i in group.primitive_index:
        chi = group.characters[i]
        data = gauss_root_data(chi, 12)
        assert abs(data.gauss_sum) == pytest.approx(math.sqrt(q), rel=1e-12)
        assert abs(data.root_number) == pytest.approx(1.0, rel=1e-12)
        bar = gauss_root_data(chi.conjugate(), 12)
        assert data.root_number * bar.root_number == pytest.approx(1.0, abs=1e-12)


def test_quadratic_character_mod_5():
    group = build_group(5)
    quad = [c for c in group.characters if all(abs(c(h).imag) < 1e-12 for h in range(5)) and c.index != 0]
    (chi,) = quad
    data = gauss_root_data(chi, 12)
    assert data.gauss_sum == pytest.approx(math.sqrt(5), abs=1e-12)
    assert data.root_number == pytest.approx(1.0, abs=1e-12)


def test_gauss_root_data_rejects_imprimitive():
    group = build_group(9)
    imprimitive = next(c for c in group.characters if not c.is_primitive)
    with pytest.raises(ValueError, match="not primitive"):
        gauss_root_data(imprimitive, 12)


def test_twist_sum_formula_equals_bruteforce():
    for q in range(1, 51):
        group = build_group(q)
        for a in units(q):
            brute = primitive_twist_sum_bruteforce(group, a)
            assert abs(brute.imag) < 1e-9
            assert primitive_twist_sum(q, a, TABLES) == round(brute.real)
            assert abs(brute.real - round(brute.real)) < 1e-9


@pytest.mark.parametrize("q,a", [(5, 2), (8, 3)])
def test_twist_sum_examples(q, a):
    assert primitive_twist_sum(q, a, TABLES) == pytest.approx(
        primitive_twist_sum_bruteforce(build_group(q), a).real, abs=1e-10
    )


def test_twist_sum_rejects_common_factor():
    with pytest.raises(ValueError):
        primitive_twist_sum(12, 3, TABLES)


def test_no_primitive_characters_at_two_mod_four():
    assert build_group(6).no_primitive
    assert not build_group(8).no_primitive
