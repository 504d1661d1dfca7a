import math
from collections import Counter
from fractions import Fraction

import pytest

from modules.core_arith import Mat2
from modules.distribution import (
    AlephSet,
    _class_representatives,
    bound_major,
    bound_minor,
    build_sequence_aN,
    character_sum,
    construct_aleph,
    equidistribution_discrepancy,
    error_sum_E1,
    error_sum_total,
    level_sweep,
    main_term_decomposition,
    ramanujan_sum,
    remainder_rq,
    squarefree_below,
)
from modules.errors import BudgetExceededError, ValidationError
from modules.local_densities import beta
from modules.semigroup import enumerate_ball, trace_multiplicities


@pytest.fixture
def toy_sequence(one_two):
    return build_sequence_aN(one_two, 4, 1, 4, AlephSet.singleton())


@pytest.fixture
def toy_sequence_six(one_two):
    return build_sequence_aN(one_two, 6, 1, 6, AlephSet.singleton())


# ==================== HELPERS ====================
def test_squarefree_below():
    assert squarefree_below(10) == [1, 2, 3, 5, 6, 7]
    assert squarefree_below(16, start=8) == [10, 11, 13, 14, 15]


def test_ramanujan_sums():
    assert ramanujan_sum(1, 17) == 1
    assert all(ramanujan_sum(p, 2) == -1 for p in (3, 5, 7, 11))
    assert ramanujan_sum(12, 0) == 4
    assert ramanujan_sum(6, 6) == 2


@pytest.mark.parametrize('q', [3, 10, 30])
def test_character_sum_is_ramanujan_weighted(q):
    counts = {n: n * n + 1 for n in range(200)}
    expected = sum(ramanujan_sum(q, n) * a for n, a in counts.items())
    value = character_sum(counts, q)
    scale = sum(counts.values())
    assert value.real == pytest.approx(expected, abs=1e-9 * scale)
    assert abs(value.imag) <= 1e-9 * scale


# ==================== REMAINDERS ====================
def test_remainder_examples(ones):
    stats = trace_multiplicities(ones, 10)
    assert stats.traces == [2, 3, 7]
    assert remainder_rq(stats, 1) == 0
    assert remainder_rq(stats, 2) == Fraction(-1, 2)
    assert remainder_rq(stats, 3) == 0


def test_remainder_rejects_non_squarefree(ones):
    with pytest.raises(ValidationError):
        remainder_rq(trace_multiplicities(ones, 10), 4)


def test_level_sweep_table(one_to_ten):
    report = level_sweep(one_to_ten, 200, [0.25, 0.5])
    assert list(report.table.columns) == ['alpha', 'Q', 'sum_abs_r', 'total', 'ratio']
    assert report.remainder(1) == 0
    ratio = report.table.set_index('alpha')['ratio']
    assert 0 < ratio[0.25] < 1
    assert ratio[0.5] >= ratio[0.25]


def test_level_sweep_tiny_alpha_is_zero(one_two):
    report = level_sweep(one_two, 200, [0.01])
    assert report.table['ratio'].iloc[0] == 0.0


def test_level_sweep_reuses_stats(one_two):
    stats = trace_multiplicities(one_two, 100)
    report = level_sweep(one_two, 100, [0.25], stats=stats)
    assert report.total == stats.total


def test_level_sweep_rejects_alpha(one_two):
    with pytest.raises(ValidationError):
        level_sweep(one_two, 100, [0.0, 0.5])
    with pytest.raises(ValidationError):
        level_sweep(one_two, 100, [1.0])


# ==================== ALEPH ====================
def test_singleton_discrepancy():
    assert equidistribution_discrepancy([Mat2.identity()], 2) == Fraction(5, 6)


def test_lifted_group_is_equidistributed():
    reps = _class_representatives(2, 200)
    assert len(reps) == 6
    assert equidistribution_discrepancy(reps.values(), 2) == 0


def test_discrepancy_rejects_empty():
    with pytest.raises(ValidationError):
        equidistribution_discrepancy([], 2)


def test_aleph_with_trivial_modulus_is_a_ball(one_two):
    aleph = construct_aleph(50, B=1)
    assert set(aleph.elements) == set(enumerate_ball(one_two, 50))


def test_aleph_mod_two():
    aleph = construct_aleph(1e4, B=2)
    assert len(aleph) > 0
    assert len(aleph) % 6 == 0
    assert all(M.norm < 1e4 for M in aleph.elements)
    assert equidistribution_discrepancy(aleph.elements, 2) == 0
    assert len({M.mod(2).as_tuple() for M in aleph.elements}) == 6


def test_aleph_small_bound_is_valid_or_refused():
    try:
        aleph = construct_aleph(1e2, B=2)
    except BudgetExceededError:
        return
    assert all(M.norm < 1e2 for M in aleph.elements)


def test_aleph_rejects_non_squarefree_modulus():
    with pytest.raises(ValidationError):
        construct_aleph(1e4, B=4)


def test_aleph_two_scale_discrepancy():
    small = construct_aleph(1e4, B=2)
    large = construct_aleph(1e8, B=2)
    assert equidistribution_discrepancy(large.elements, 3) <= equidistribution_discrepancy(small.elements, 3)


def test_aleph_measure_records_discrepancies():
    aleph = construct_aleph(1e4, B=2)
    table = aleph.measure([2, 3])
    assert table[2] == 0
    assert 0 < table[3] <= 1


# ==================== SEQUENCE ====================
def test_identity_sequence(ones):
    sequence = build_sequence_aN(ones, 1.5, 1, 1.5, AlephSet.singleton())
    assert sequence.counts == {2: 1}
    assert sequence.size == 1


def test_toy_sequence_matches_direct_count(one_two, toy_sequence):
    ball = list(enumerate_ball(one_two, 4))
    direct = Counter((xi @ omega).trace for xi in ball for omega in ball)
    assert toy_sequence.counts == dict(direct)
    assert toy_sequence.size == 16


def test_sequence_size_identity(one_two):
    aleph = construct_aleph(1e4, B=2)
    sequence = build_sequence_aN(one_two, 5, 1e4, 5, aleph)
    xi = len(list(enumerate_ball(one_two, 5)))
    assert sequence.size == xi * len(aleph) * xi
    assert sum(sequence.value(n) for n in sequence.counts) == sequence.size


def test_sequence_budget_guard(one_two):
    with pytest.raises(BudgetExceededError):
        build_sequence_aN(one_two, 30, 1, 30, AlephSet.singleton(), max_triples=10)


# ==================== MAIN TERMS ====================
def test_main_term_trivial_modulus(toy_sequence):
    result = main_term_decomposition(toy_sequence, 1, 10)
    assert result.main_term == toy_sequence.size
    assert result.remainder == 0


def test_main_term_low_q0_keeps_only_q1(toy_sequence):
    result = main_term_decomposition(toy_sequence, 6, 1)
    assert result.divisors_used == [1]
    assert result.main_term == Fraction(toy_sequence.size, 6)
    assert result.remainder == toy_sequence.count_in_class(6) - Fraction(toy_sequence.size, 6)


def test_main_term_full_orthogonality(toy_sequence):
    result = main_term_decomposition(toy_sequence, 6, 7)
    assert result.main_term == toy_sequence.count_in_class(6)
    assert result.remainder == 0


def test_main_term_reports_density_prediction(toy_sequence):
    result = main_term_decomposition(toy_sequence, 3, 1)
    assert result.beta_prediction == beta(3) * toy_sequence.size
    assert result.deviation == result.main_term - result.beta_prediction


def test_orthogonality_numeric_exactness(toy_sequence_six):
    for q in squarefree_below(31):
        result = main_term_decomposition(toy_sequence_six, q, q + 1)
        exact = toy_sequence_six.count_in_class(q)
        assert abs(result.main_term_numeric.real - exact) <= 1e-8 * max(exact, 1)
        assert abs(result.main_term_numeric.imag) <= 1e-8 * toy_sequence_six.size


def test_main_term_rejects_non_squarefree(toy_sequence):
    with pytest.raises(ValidationError):
        main_term_decomposition(toy_sequence, 4, 10)


# ==================== ERROR SUMS ====================
def test_e1_identity_balls(ones):
    result = error_sum_E1(ones, 3, Mat2.identity(), 1.5, 1.5, moduli=[3, 5, 7])
    assert result.value == -3
    assert result.magnitude == 3


def test_e1_against_bounds(one_two):
    result = error_sum_E1(one_two, 8, Mat2.identity(), 6, 6)
    assert result.moduli == [10, 11, 13, 14, 15]
    assert result.magnitude <= 10 * result.bound5
    assert result.bound6 > 0
    assert math.isfinite(result.ratio6)
    assert set(result.to_dict()) >= {'value', 'bound5', 'bound6', 'ratio5', 'ratio6'}


def test_bound_formulas():
    assert bound_major(1, 1, 1, 1) == pytest.approx(3.0)
    assert bound_minor(1, 1, 1, 1) == pytest.approx(2.0)


def test_e1_rejects_small_q(one_two):
    with pytest.raises(ValidationError):
        error_sum_E1(one_two, 0.5, Mat2.identity(), 6, 6)


def test_error_sum_total_matches_direct(toy_sequence):
    report = error_sum_total(toy_sequence, 2, 8)
    expected = sum(
        (abs(main_term_decomposition(toy_sequence, q, 2).remainder) for q in squarefree_below(8)),
        Fraction(0),
    )
    assert report.direct == expected
    assert list(report.table.columns) == ['Q', 'moduli', 'max_abs_e1', 'sum_abs_e1_over_Q']
    assert report.dyadic >= 0


def test_error_sum_total_single_dyadic_block(toy_sequence):
    report = error_sum_total(toy_sequence, 3, 4)
    assert report.direct == abs(main_term_decomposition(toy_sequence, 3, 3).remainder)
    assert list(report.table['Q']) == [2]
    assert report.within_dyadic


def test_error_sum_total_vanishes_below_q0(toy_sequence):
    report = error_sum_total(toy_sequence, 9, 8)
    assert report.direct == 0
    assert report.dyadic == 0.0
    assert report.table.empty
    assert report.within_dyadic


def test_error_sum_total_rejects_level(toy_sequence):
    with pytest.raises(ValidationError):
        error_sum_total(toy_sequence, 2, 1)
