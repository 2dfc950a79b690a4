import math
import random

import numpy as np
import pytest

from lfmoments.afe import (
    WeightEvaluator,
    afe_lengths,
    gauss_sums,
    grid_weights,
    l_pair_value,
    l_value,
    parallel_map,
    root_numbers,
    twisted_l_values,
    weight_pair,
    weight_single,
)
from lfmoments.dirichlet import build_group, gauss_root_data
from lfmoments.errors import CapabilityError
from lfmoments.hecke import build_delta_coefficients
from lfmoments.special import log_gamma


def completed(s, chi, X, coeffs):
    q, g = chi.q, (coeffs.kappa - 1) / 2
    val = l_value(s, chi, X, coeffs).value
    return complex(np.exp(s * math.log(q / (2 * math.pi)) + log_gamma(g + s))) * val


def test_single_weight_limits():
    ev = WeightEvaluator.single(0.0)
    assert weight_single(0.0, 1e-6, ev) == pytest.approx(1.0, abs=1e-9)
    assert abs(weight_single(0.0, 1e3, ev)) < 1e-5
    small, large = ev(np.array([1e-3, 1e1]))[0]
    assert abs(small) > abs(large)


def test_pair_weight_limits():
    ev = WeightEvaluator.pair(0.5 + 0.1j, 0.5 - 0.1j)
    assert weight_pair(0.5 + 0.1j, 0.5 - 0.1j, 1e-8, ev) == pytest.approx(1.0, abs=1e-9)
    assert abs(weight_pair(0.5 + 0.1j, 0.5 - 0.1j, 1e6, ev)) < 1e-15


def test_weight_is_real_at_real_t():
    vals, cert = WeightEvaluator.single(0.0)(np.geomspace(1e-3, 1e2, 30))
    assert np.max(np.abs(vals.imag)) < 1e-12
    assert cert < 1e-9


def test_weight_rejects_mismatch_and_bad_argument():
    ev = WeightEvaluator.single(0.0)
    with pytest.raises(ValueError):
        weight_single(0.5, 1.0, ev)
    with pytest.raises(ValueError):
        weight_single(0.0, -1.0, ev)
    with pytest.raises(ValueError):
        WeightEvaluator("triple", ())


def test_lvalue_in_absolute_convergence_region(coeffs):
    group = build_group(7)
    n = np.arange(1, 200_001)
    for i in group.primitive_index:
        chi = group.characters[i]
        direct = np.sum(coeffs.lam[1:] * group.value_table([i], n)[0] * n.astype(float) ** -2.5)
        assert abs(l_value(2.5, chi, 1.0, coeffs).value - direct) < 1e-5


def test_lvalue_independent_of_balance(coeffs):
    group = build_group(11)
    chi = group.characters[group.primitive_index[3]]
    values = [l_value(0.5, chi, X, coeffs).value for X in (0.5, 1.0, 2.0)]
    assert max(abs(v - values[1]) for v in values) < 1e-8


def test_functional_equation_with_distinct_balances(coeffs):
    rng = random.Random(7)
    for _ in range(4):
        q = rng.choice([5, 7, 13, 16, 25])
        group = build_group(q)
        chi = group.characters[rng.choice(group.primitive_index)]
        s = complex(rng.uniform(0.3, 0.7), rng.uniform(-3, 3))
        iota = gauss_root_data(chi, coeffs.kappa).root_number
        lhs = completed(s, chi, 1.0, coeffs)
        rhs = iota * completed(1 - s, chi.conjugate(), 1.4, coeffs)
        assert abs(lhs - rhs) / max(abs(lhs), abs(rhs)) < 1e-8


def test_certificates_reported(coeffs):
    group = build_group(13)
    res = l_value(0.5 + 2j, group.characters[group.primitive_index[0]], 1.0, coeffs)
    assert res.truncation_error < 1e-9
    assert res.quadrature_error < 1e-6
    assert min(res.lengths) > 0


def test_batch_matches_single(coeffs):
    group = build_group(16)
    batch = twisted_l_values(0.5 + 0.3j, group, coeffs)
    for pos, i in enumerate(batch.indices):
        single = l_value(0.5 + 0.3j, group.characters[i], 1.0, coeffs).value
        assert batch.values[pos] == pytest.approx(single, abs=1e-12)
    assert batch.by_index()[batch.indices[0]] == batch.values[0]


def test_conjugate_symmetry(coeffs):
    # L(conj s, chi-bar) = conj L(s, chi)
    group = build_group(13)
    s = 0.5 + 1.1j
    vals = twisted_l_values(s, group, coeffs).by_index()
    vals_bar = twisted_l_values(s.conjugate(), group, coeffs).by_index()
    for i, v in vals.items():
        assert vals_bar[int(group.conj_index[i])] == pytest.approx(v.conjugate(), abs=1e-10)


def test_thread_count_does_not_change_bits(coeffs):
    group = build_group(37)
    a = twisted_l_values(0.5, group, coeffs, threads=1).values
    b = twisted_l_values(0.5, group, coeffs, threads=3).values
    assert np.array_equal(a, b)


def test_fast_weights_within_measured_budget(coeffs):
    group = build_group(29)
    exact = twisted_l_values(0.5, group, coeffs)
    fast = twisted_l_values(0.5, group, coeffs, fast_weights=True)
    assert np.max(np.abs(exact.values - fast.values)) <= fast.quadrature_error + 1e-9
    assert np.max(np.abs(exact.values - fast.values)) < 1e-4


def test_grid_weights_error_estimate():
    ev = WeightEvaluator.single(1.0)
    y = np.geomspace(1e-4, 10.0, 500)
    approx, err = grid_weights(ev.kernel, y)
    exact, _ = ev(y)
    assert np.max(np.abs(approx - exact)) <= 2 * err


def test_pair_value_matches_product(coeffs):
    group = build_group(13)
    chi = group.characters[group.primitive_index[2]]
    s1, s2 = 0.6 + 0.3j, 0.7 - 0.1j
    pair = l_pair_value(s1, s2, chi, coeffs).value
    prod = l_value(s1, chi, 1.0, coeffs).value * l_value(s2, chi.conjugate(), 1.0, coeffs).value
    assert abs(pair - prod) < 1e-8


def test_imprimitive_rejected(coeffs):
    group = build_group(9)
    chi = next(c for c in group.characters if not c.is_primitive)
    with pytest.raises(ValueError, match="not primitive"):
        l_value(0.5, chi, 1.0, coeffs)
    with pytest.raises(ValueError):
        twisted_l_values(0.5, group, coeffs, [chi.index])


def test_short_table_is_capability_error():
    tiny = build_delta_coefficients(50)
    group = build_group(101)
    with pytest.raises(CapabilityError) as info:
        twisted_l_values(0.5, group, tiny)
    assert info.value.required > 50


def test_lengths_grow_with_q():
    n_small = afe_lengths(0.5, 11, 12)[0]
    n_large = afe_lengths(0.5, 101, 12)[0]
    assert n_large > 5 * n_small


def test_root_numbers_and_gauss_sums_agree(coeffs):
    group = build_group(25)
    idx = group.primitive_index
    tau = gauss_sums(group, idx, threads=2)
    iota = root_numbers(group, idx, 12)
    for k, i in enumerate(idx):
        data = gauss_root_data(group.characters[i], 12)
        assert tau[k] == pytest.approx(data.gauss_sum, abs=1e-10)
        assert iota[k] == pytest.approx(data.root_number, abs=1e-12)


def test_parallel_map_preserves_order():
    assert parallel_map(lambda x: x * x, list(range(20)), threads=4) == [x * x for x in range(20)]
