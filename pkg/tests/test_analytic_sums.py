import math
from fractions import Fraction

import numpy as np
import pytest
from sympy import primerange

from modules.analytic_sums import (
    DEFAULT_MAX_BALL,
    BumpFunction,
    SL2Sums,
    additive_energy,
    bump_mass,
    bump_support_ball,
    energy_growth,
    enumerate_sl2_ball,
    exp_sum_regime,
    exp_sum_sl2,
    gauss_sum_Sr,
    oscillatory_JX,
    sl2_norm_ball,
    stationary_phase_bound,
    theta_decomposition,
    theta_sum_GX,
)
from modules.core_arith import is_squarefree
from modules.errors import BudgetExceededError, ValidationError


@pytest.fixture(scope='module')
def bump():
    return BumpFunction()


def _brute_sl2(limit, accept):
    axis = np.arange(-limit + 1, limit)
    a, b, c, d = np.meshgrid(axis, axis, axis, axis, indexing='ij')
    keep = (a * d - b * c == 1) & accept(a, b, c, d)
    return {tuple(int(x) for x in row) for row in np.stack([a[keep], b[keep], c[keep], d[keep]], axis=1)}


# ==================== BUMP ====================
def test_bump_shape(bump):
    t = np.linspace(-10, 10, 201)
    assert np.all(bump(t) >= 1 - 1e-12)
    assert np.allclose(bump(t), bump(-t))
    assert bump(20.0) == 0.0
    assert bump(25.0) == 0.0
    assert bump(19.9) > 0.0


def test_bump_rejects_narrow_support():
    with pytest.raises(ValidationError):
        BumpFunction(width=10.0)


def test_bump_mass_matches_integral(bump):
    assert bump_mass(100, bump) == pytest.approx(100 * bump.integral(), rel=1e-8)


# ==================== SL2(Z) BALLS ====================
def test_bump_support_ball_matches_brute_force(bump):
    ball = bump_support_ball(0.5, bump)
    found = {M.as_tuple() for M in ball.matrices()}
    expected = _brute_sl2(10, lambda a, b, c, d: (np.abs(a) + np.abs(d) < 10) & (np.abs(b) + np.abs(c) < 10))
    assert found == expected
    assert len(ball) == len(found)


def test_norm_ball_matches_brute_force():
    ball = sl2_norm_ball(5)
    found = {M.as_tuple() for M in ball.matrices()}
    assert found == _brute_sl2(5, lambda a, b, c, d: a * a + b * b + c * c + d * d < 25)
    assert all(M.det == 1 for M in ball.matrices())


def test_enumerate_sl2_ball_streams_once(bump):
    elements = list(enumerate_sl2_ball(0.5, bump))
    assert len(elements) == len(set(elements))


def test_sl2_ball_guard():
    with pytest.raises(BudgetExceededError):
        sl2_norm_ball(100, max_count=1000)


def test_bump_support_ball_at_unit_scale(bump):
    ball = bump_support_ball(1, bump)
    found = {M.as_tuple() for M in ball.matrices()}
    expected = _brute_sl2(20, lambda a, b, c, d: (np.abs(a) + np.abs(d) < 20) & (np.abs(b) + np.abs(c) < 20))
    assert found == expected
    assert len(ball) == len(found)


def test_bump_support_guard_admits_largest_grid_point(bump):
    with pytest.raises(BudgetExceededError) as info:
        bump_support_ball(80, bump, max_count=1000)
    assert info.value.estimate <= DEFAULT_MAX_BALL


def test_ball_weights_are_cached(bump):
    ball = bump_support_ball(0.5, bump)
    assert ball.weights(0.5, bump) is ball.weights(0.5, bump)
    assert ball.weights(0.5, bump).shape == (len(ball),)


# ==================== EXPONENTIAL SUMS ====================
def test_exp_sum_trivial_modulus_is_mass(bump):
    result = exp_sum_sl2(1, 1, (1, 0, 0, 0), bump)
    assert abs(result.value.imag) <= 1e-10 * result.mass
    assert result.value.real == pytest.approx(result.mass)


def test_exp_sum_conjugation(bump):
    ball = bump_support_ball(1, bump)
    plus = exp_sum_sl2(1, 7, (1, 2, 3, 4), bump, ball)
    minus = exp_sum_sl2(1, 7, (-1, -2, -3, -4), bump, ball)
    assert minus.value == pytest.approx(plus.value.conjugate(), abs=1e-9 * plus.mass)
    assert abs(plus.value) <= plus.mass + 1e-9


@pytest.mark.parametrize('s', [(2, 0, 0, 0), (3, 6, 9, 12), (1, 2, 3)])
def test_exp_sum_rejects_bad_vectors(bump, s):
    with pytest.raises(ValidationError):
        exp_sum_sl2(1, 5, s, bump)


def test_exp_sum_regime_small_grid(bump):
    table = exp_sum_regime([2, 4], samples=3, seed=7, bump=bump)
    assert {'X', 'q', 's', 'abs', 'rhs', 'ratio', 'calibrated', 'within'} <= set(table.columns)
    assert len(table) == 3 * (2 + 3)
    assert table['within'].all()
    assert table.loc[table['q'] == 1, 'calibrated'].to_numpy() == pytest.approx(1.0)


def test_exp_sum_matches_termwise_sum(bump):
    ball = bump_support_ball(1, bump)
    s = (1, 2, 3, 4)
    result = exp_sum_sl2(1, 7, s, bump, ball)
    points = ball.stacked()
    weights = bump.weight(points[:, 0], points[:, 1], points[:, 2], points[:, 3], 1)
    direct = np.sum(weights * np.exp(2j * np.pi * ((points @ np.array(s)) % 7) / 7))
    assert result.value == pytest.approx(complex(direct), abs=1e-9 * result.mass)


def test_sl2_sums_engine_reuses_ball():
    sums = SL2Sums({'max_ball': 10 ** 6, 'expsum_samples': 2})
    assert sums.ball(1) is sums.ball(1)
    trivial = sums.exp_sum(1, 1, (1, 0, 0, 0))
    assert trivial.value.real == pytest.approx(trivial.mass)
    table = sums.regime([2], seed=3)
    assert len(table) == 2 * 2


def test_sl2_sums_engine_respects_cap():
    with pytest.raises(BudgetExceededError):
        SL2Sums({'max_ball': 10}).ball(1)


@pytest.mark.slow
def test_exp_sum_regime_on_doubling_grid(bump):
    table = exp_sum_regime([20, 40, 80], samples=20, seed=0, bump=bump)
    moduli = sum(1 for X in (20, 40, 80) for q in range(1, X + 1) if is_squarefree(q))
    assert len(table) == 20 * moduli
    assert table['within'].all()


# ==================== THETA SUM BLOCKS ====================
def test_gauss_sum_small_cases():
    assert gauss_sum_Sr(1, 1, 0) == pytest.approx(1)
    assert gauss_sum_Sr(2, 1, 1) == pytest.approx(1)
    assert abs(gauss_sum_Sr(3, 1, 0)) == pytest.approx(1 / math.sqrt(3))


def test_gauss_sum_prime_magnitude():
    for p in primerange(3, 98):
        for a in (1, 2):
            assert abs(gauss_sum_Sr(p, a, 0)) == pytest.approx(1 / math.sqrt(p), rel=1e-9)


def test_gauss_sum_rejects():
    with pytest.raises(ValidationError):
        gauss_sum_Sr(4, 2, 0)
    with pytest.raises(ValidationError):
        gauss_sum_Sr(0, 1, 0)


@pytest.mark.parametrize('r', [2, 3, 5])
@pytest.mark.parametrize('lam', [Fraction(0), Fraction(1, 7)])
@pytest.mark.parametrize('X', [50, 200])
def test_theta_decomposition(bump, r, lam, X):
    direct = theta_sum_GX(X, Fraction(1, r), lam, bump)
    split = theta_decomposition(r, 1, lam, X, K=20, bump=bump)
    assert abs(direct - split) <= 1e-3 * bump_mass(X, bump)


def test_theta_sum_rejects_small_x(bump):
    with pytest.raises(ValidationError):
        theta_sum_GX(0.5, 0, 0, bump)


def test_jx_at_origin_is_mass(bump):
    assert oscillatory_JX(10, 0, 0, bump).real == pytest.approx(10 * bump.integral(), rel=1e-8)


def test_jx_decays_in_z(bump):
    top = abs(oscillatory_JX(1, 0, 0, bump))
    assert abs(oscillatory_JX(1, 0, 0.01, bump)) < top
    assert abs(oscillatory_JX(1, 0, 0.5, bump)) < 0.1 * top


def test_jx_stationary_phase(bump):
    assert stationary_phase_bound(100, 0) == 100
    assert stationary_phase_bound(100, 1e-2) == pytest.approx(10)
    value = oscillatory_JX(100, 1e-2, 0, bump)
    assert abs(value) <= 4 * stationary_phase_bound(100, 1e-2)


# ==================== ADDITIVE ENERGY ====================
def test_energy_identities():
    report = additive_energy(5)
    b = report.ball_size
    assert b == len(sl2_norm_ball(5))
    assert report.zero_difference == b
    assert report.difference_total == b * b
    assert report.energy == report.difference_energy
    assert report.energy >= report.diagonal == 2 * b * b - b
    assert report.distinct_sums <= b * b


def test_energy_guard():
    with pytest.raises(BudgetExceededError) as info:
        additive_energy(10, max_pairs=10)
    assert info.value.cap == 10


def test_energy_growth_table():
    table, slope = energy_growth([4, 6, 8])
    assert list(table['X']) == [4, 6, 8]
    assert table['E'].is_monotonic_increasing
    assert math.isfinite(slope)
    assert 'fit' in table.columns


@pytest.mark.slow
def test_energy_exponent_on_doubling_grid():
    table, slope = energy_growth([10, 20, 40, 80])
    assert (table['E'] >= table['diagonal']).all()
    assert (table['sum_N'] == table['ball'] ** 2).all()
    assert 3.8 <= slope <= 4.7


def test_energy_slices_match_all_pairs():
    points = sl2_norm_ball(5).stacked()
    sums = (points[:, None, :] + points[None, :, :]).reshape(-1, 4)
    _, counts = np.unique(sums, axis=0, return_counts=True)
    report = additive_energy(5)
    assert report.energy == int(np.sum(counts.astype(np.int64) ** 2))
    assert report.distinct_sums == counts.size


def test_sl2_sums_energy_uses_pair_cap():
    with pytest.raises(BudgetExceededError) as info:
        SL2Sums({'max_pairs': 100}).energy_growth([5])
    assert info.value.cap == 100
