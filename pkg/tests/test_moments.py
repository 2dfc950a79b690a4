import math

import numpy as np
import pytest

from lfmoments.afe import l_pair_value
from lfmoments.dirichlet import build_group
from lfmoments.moments import (
    MainTermEvaluator,
    MomentTask,
    TaskError,
    brute_force_twisted_moment,
    check_conditions,
    kth_moment_sum,
    main_term_diagonal_limit,
    main_term_theorem,
    moment_compare,
    moment_scan,
    validate_modulus,
    validate_twist,
)


@pytest.fixture(scope="module")
def specials(coeffs):
    return MainTermEvaluator(coeffs)


@pytest.mark.parametrize("q", [2, 6, 10, 102])
def test_two_mod_four_rejected(q):
    with pytest.raises(TaskError, match=r"≡ 2 \(mod 4\)"):
        validate_modulus(q)


@pytest.mark.parametrize("q,a,b", [(15, 3, 1), (7, 2, 4), (7, 0, 1)])
def test_twist_validation(q, a, b):
    with pytest.raises(TaskError):
        validate_twist(q, a, b)


def test_task_rejects_out_of_strip():
    with pytest.raises(TaskError):
        MomentTask(101, 1, 1, 1.2, 0.5)


def test_conditions_for_primes_and_composites():
    c = check_conditions(101, 1, 1, 0.5, 0.5)
    assert c.case == "ii" and c.size_ok and c.twist_ok
    assert c.error_scale(101) == pytest.approx(101 ** (1 - 1 / 14400))
    c = check_conditions(3**8, 1, 1, 0.5, 0.5)
    assert c.case == "i" and c.q0 % 3 == 0
    assert check_conditions(101, 5, 1, 0.5, 0.5).twist_ok is False


def test_brute_force_matches_pair_evaluator(coeffs):
    task = MomentTask(13, 2, 1, 0.5 + 0.2j, 0.5 - 0.2j)
    group = build_group(13)
    bf = brute_force_twisted_moment(task, group, coeffs).value
    total = 0j
    for i in group.primitive_index:
        chi = group.characters[i]
        total += l_pair_value(task.s1, task.s2, chi, coeffs).value * chi(2) * chi(1).conjugate()
    assert abs(bf - total) < 1e-6


def test_brute_force_general_pair_uses_conjugate_characters(coeffs):
    # s2 != conj s1 exercises the chi-bar lookup
    task = MomentTask(11, 1, 1, 0.6 + 0.1j, 0.4 + 0.2j)
    group = build_group(11)
    bf = brute_force_twisted_moment(task, group, coeffs).value
    total = 0j
    for i in group.primitive_index:
        chi = group.characters[i]
        total += l_pair_value(task.s1, task.s2, chi, coeffs).value
    assert abs(bf - total) < 1e-6


def test_brute_force_thread_invariance(coeffs):
    task = MomentTask.critical(61, 0.4, 2, 3)
    group = build_group(61)
    a = brute_force_twisted_moment(task, group, coeffs, threads=1)
    b = brute_force_twisted_moment(task, group, coeffs, threads=4)
    assert a.value == b.value


def test_two_term_form_tends_to_diagonal_limit(specials):
    # s1 + s2 -> 1 along s1 = 1/2 + d/2 + it, s2 = 1/2 + d/2 - it
    for a, b in [(1, 1), (3, 2)]:
        limit = main_term_diagonal_limit(101, 0.1, a, b, specials, "log")
        gaps = []
        for d in (1e-3, 1e-4):
            task = MomentTask(101, a, b, complex(0.5 + d / 2, 0.1), complex(0.5 + d / 2, -0.1))
            gaps.append(abs(main_term_theorem(task, specials).total - limit) / abs(limit))
        assert gaps[1] < 1e-3
        assert gaps[1] < gaps[0] / 5


def test_raw_interpretation_is_not_the_limit(specials):
    limit = main_term_diagonal_limit(101, 0.1, 1, 1, specials, "log")
    raw = main_term_diagonal_limit(101, 0.1, 1, 1, specials, "raw")
    task = MomentTask(101, 1, 1, complex(0.50005, 0.1), complex(0.50005, -0.1))
    near = main_term_theorem(task, specials).total
    assert abs(near - limit) < abs(near - raw) / 10


def test_two_term_form_rejects_diagonal(specials):
    with pytest.raises(TaskError):
        main_term_theorem(MomentTask.critical(101, 0.0), specials)


def test_small_modulus_report_is_finite(coeffs, specials):
    rep = moment_compare(MomentTask.critical(5, 0.0), coeffs, specials)
    assert rep.form == "limit" and rep.phi_star == 3
    assert math.isfinite(rep.relative_residual)
    assert rep.lhs.real > 0


def test_general_form_at_q101(coeffs, specials):
    rep = moment_compare(MomentTask(101, 1, 1, 0.55, 0.55), coeffs, specials)
    assert rep.form == "general"
    assert rep.relative_residual < 0.5
    assert rep.main_sum == rep.main_term_1 + rep.main_term_2


def test_diagonal_limit_at_q211(coeffs, specials):
    rep = moment_compare(MomentTask.critical(211, 0.0), coeffs, specials, threads=2)
    assert rep.relative_residual < 0.35
    assert rep.relative_residual == pytest.approx(abs(rep.residual) / abs(rep.main_sum))
    assert rep.interpretation == "log" and rep.alt_interpretation == "raw"
    assert rep.truncation_error < 1e-3 and rep.quadrature_error < 1e-3


def test_scan_isolates_failures(coeffs, specials):
    entries = moment_scan([5, 6, 7], 0.0, 1, 1, coeffs, specials)
    assert [e.q for e in entries] == [5, 6, 7]
    assert entries[0].status == "ok" and entries[2].status == "ok"
    assert entries[1].report is None and entries[1].status.startswith("error")


def test_kth_moment_counts_at_k_zero():
    res = kth_moment_sum(101, 0.0, 0.0, build_group(101), None)
    assert res.value == 99 and res.phi_star == 99


def test_kth_moment_k_one_is_second_moment(coeffs):
    group = build_group(37)
    res = kth_moment_sum(37, 0.2, 1.0, group, coeffs)
    bf = brute_force_twisted_moment(MomentTask.critical(37, 0.2), group, coeffs)
    assert res.value == pytest.approx(bf.value.real, rel=1e-12)


def test_kth_moment_rejects_negative_k(coeffs):
    with pytest.raises(ValueError):
        kth_moment_sum(37, 0.0, -1.0, build_group(37), coeffs)


def test_zeta_sym2_normalization_differs(coeffs):
    alt = MainTermEvaluator(coeffs, "zeta_sym2")
    rs = MainTermEvaluator(coeffs)
    a = main_term_diagonal_limit(101, 0.0, 1, 1, alt)
    b = main_term_diagonal_limit(101, 0.0, 1, 1, rs)
    assert abs(a - b) / abs(b) > 0.05
