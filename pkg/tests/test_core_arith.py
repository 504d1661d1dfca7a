import math
from fractions import Fraction

import pytest

from modules.core_arith import (
    ContinuedFraction,
    Mat2,
    QuadraticIrrational,
    almost_prime_class,
    cf_convergents,
    cf_evaluate,
    cf_expand_quadratic,
    cf_expand_rational,
    factorize,
    fundamental_discriminant,
    is_almost_prime,
    is_square,
    is_squarefree,
    mobius,
    pell_fundamental,
    periodic_fixed_point,
    squarefree_part,
    word_matrix,
)
from modules.errors import BudgetExceededError, ValidationError

WORKED_PERIOD = (2, 2, 1, 2, 1, 2, 1, 2, 1, 2, 1, 2, 1, 1, 3, 1, 2, 1, 2, 1, 2, 1, 2, 1, 2, 1, 1, 1)


# ==================== Mat2 ====================
def test_mat2_basic_invariants():
    M = Mat2(80198051, 50843528, 33895684, 21489003)
    assert M.det == 1
    assert M.trace == 101687054
    assert M.norm_sq == M.a ** 2 + M.b ** 2 + M.c ** 2 + M.d ** 2
    assert M.discriminant == 10340256951198912


def test_worked_discriminant_factorization():
    D = Mat2(80198051, 50843528, 33895684, 21489003).discriminant
    assert D == 3 * 58709048 ** 2
    assert D == 12 * (4 * 41 * 71 * 2521) ** 2


def test_mat2_power_and_identity():
    g = Mat2.generator(1)
    assert (g ** 0).is_identity()
    assert g ** 2 == Mat2(2, 1, 1, 1)
    assert g ** 4 == Mat2(5, 3, 3, 2)
    assert word_matrix([2, 2]) == Mat2(5, 2, 2, 1)


@pytest.mark.parametrize('a', [1, 2, 5, 10])
def test_norm_monotone_under_generators(a):
    for word in ([1], [1, 2], [3, 1, 4], [2, 2, 2, 2]):
        M = word_matrix(word)
        assert (M @ Mat2.generator(a)).norm_sq >= M.norm_sq


# ==================== FACTORIZATION ====================
@pytest.mark.parametrize('n, expected', [(12, (3, 2)), (1, (1, 1)), (10340256951198912, (3, 58709048))])
def test_squarefree_part_examples(n, expected):
    assert squarefree_part(n) == expected


def test_squarefree_part_reconstruction():
    for n in range(1, 5001):
        sqf, root = squarefree_part(n)
        assert n == sqf * root * root
        assert is_squarefree(sqf)


def test_squarefree_part_rejects_zero():
    with pytest.raises(ValidationError):
        squarefree_part(0)


def test_factorize_guard():
    with pytest.raises(BudgetExceededError):
        factorize(10 ** 40)


@pytest.mark.parametrize('n, omega', [(101, 1), (12, 3), (5822, 3)])
def test_almost_prime_class(n, omega):
    assert almost_prime_class(n) == omega


def test_is_almost_prime():
    assert is_almost_prime(6, 2)
    assert not is_almost_prime(8, 2)


def test_fundamental_discriminant():
    assert fundamental_discriminant(5) == 5
    assert fundamental_discriminant(45) == 5
    assert fundamental_discriminant(12) == 12
    assert fundamental_discriminant(8) == 8


def test_mobius_values():
    assert [mobius(n) for n in (1, 2, 4, 5, 6, 30)] == [1, -1, 0, -1, 1, -1]


# ==================== QUADRATIC IRRATIONALS ====================
def test_canonical_form():
    x = QuadraticIrrational.of(2, 1, 4, 12)
    assert x == QuadraticIrrational(1, 1, 2, 3)
    assert QuadraticIrrational.of(-1, -1, -2, 5) == QuadraticIrrational(1, 1, 2, 5)


def test_rational_input_rejected():
    with pytest.raises(ValidationError):
        QuadraticIrrational.of(1, 1, 1, 4)
    with pytest.raises(ValidationError):
        QuadraticIrrational.of(1, 0, 1, 5)


def test_floor_and_sign_are_exact():
    root3 = QuadraticIrrational.sqrt(3)
    assert root3.floor() == 1
    assert root3.conjugate().floor() == -2
    assert root3.sign() == 1
    assert root3.conjugate().sign() == -1
    assert root3.compare(Fraction(173, 100)) > 0
    assert root3.compare(Fraction(174, 100)) < 0


def test_mobius_action_fixes_golden_ratio():
    golden = QuadraticIrrational.of(1, 1, 2, 5)
    assert golden.act(Mat2(2, 1, 1, 1)) == golden
    assert golden.is_reduced()


# ==================== CONTINUED FRACTIONS ====================
@pytest.mark.parametrize('num, den, terms', [(1, 1, (1,)), (7, 1, (7,)), (355, 113, (3, 7, 16))])
def test_cf_expand_rational_examples(num, den, terms):
    assert cf_expand_rational(num, den).preperiod == terms


def test_cf_expand_rational_rejects_non_coprime():
    with pytest.raises(ValidationError):
        cf_expand_rational(6, 4)


def test_cf_rational_round_trip():
    for den in range(1, 61):
        for num in range(-60, 200):
            if math.gcd(num, den) != 1:
                continue
            cf = cf_expand_rational(num, den)
            terms = cf.terms()
            if len(terms) > 1:
                assert terms[-1] >= 2
            assert cf_evaluate(cf) == Fraction(num, den)


def test_cf_convergents():
    assert cf_convergents([3, 7, 16]) == [(3, 1), (22, 7), (355, 113)]


def test_cf_expand_sqrt3():
    cf = cf_expand_quadratic(QuadraticIrrational.sqrt(3))
    assert cf.preperiod == (1,)
    assert cf.period == (1, 2)


def test_cf_expand_golden_ratio():
    cf = cf_expand_quadratic(QuadraticIrrational.of(1, 1, 2, 5))
    assert cf.is_purely_periodic
    assert cf.period == (1,)


def test_cf_expand_worked_fixed_point():
    cf = cf_expand_quadratic(QuadraticIrrational.of(2521, 2521, 2911, 3))
    assert cf.is_purely_periodic
    assert cf.period == WORKED_PERIOD


@pytest.mark.parametrize('x', [
    QuadraticIrrational.sqrt(3),
    QuadraticIrrational.sqrt(7),
    QuadraticIrrational.of(1, 1, 2, 5),
    QuadraticIrrational.of(-3, 2, 5, 11),
    QuadraticIrrational.of(2521, 2521, 2911, 3),
])
def test_cf_quadratic_round_trip(x):
    assert cf_evaluate(cf_expand_quadratic(x)) == x


def test_periodic_fixed_point_matches_matrix():
    y = periodic_fixed_point((1, 2))
    assert y == QuadraticIrrational.of(1, 1, 2, 3)
    assert y.act(word_matrix((1, 2))) == y


def test_continued_fraction_rejects_zero_quotient():
    with pytest.raises(ValidationError):
        ContinuedFraction(preperiod=(1, 0, 2))


# ==================== PELL ====================
@pytest.mark.parametrize('delta, t, s', [(12, 4, 1), (5, 3, 1), (2, 6, 4), (3, 4, 2), (13, 11, 3)])
def test_pell_fundamental_examples(delta, t, s):
    solution = pell_fundamental(delta)
    assert (solution.t, solution.s) == (t, s)


def test_pell_fundamental_all_small_discriminants():
    for delta in range(2, 501):
        if is_square(delta):
            continue
        solution = pell_fundamental(delta, scan_cap=2000)
        assert solution.t > 2
        assert solution.t ** 2 - delta * solution.s ** 2 == 4


def test_pell_rejects_square():
    with pytest.raises(ValidationError):
        pell_fundamental(16)
