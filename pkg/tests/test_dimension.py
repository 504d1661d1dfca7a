import numpy as np
import pytest

from modules.dimension import (
    DimensionEstimator,
    TransferOperatorApprox,
    chebyshev_nodes,
    eigenvalue_curve,
    estimate_dimension,
    transfer_eigenvalue,
)
from modules.errors import ValidationError
from modules.semigroup import Alphabet, hensley_fit

GOLDEN = (1 + 5 ** 0.5) / 2


def test_chebyshev_nodes_inside_unit_interval():
    nodes = chebyshev_nodes(16)
    assert nodes.shape == (16,)
    assert np.all((nodes > 0) & (nodes < 1))
    assert np.all(np.diff(nodes) > 0)


def test_single_branch_eigenvalues():
    assert transfer_eigenvalue((1,), 1.0) == pytest.approx(GOLDEN ** -2, abs=1e-8)
    assert transfer_eigenvalue((1,), 0.0) == pytest.approx(1.0, abs=1e-10)


def test_one_two_eigenvalue_near_one_at_dimension():
    assert transfer_eigenvalue((1, 2), 0.5313) == pytest.approx(1.0, abs=1e-3)


def test_weights_positive():
    operator = TransferOperatorApprox.build((1, 2, 3), 0.7, order=16)
    assert np.all(operator.weights > 0)
    assert operator.matrix.shape == (16, 16)


def test_build_rejects_bad_parameters():
    with pytest.raises(ValidationError):
        TransferOperatorApprox.build((1, 2), 0.5, order=4)
    with pytest.raises(ValidationError):
        TransferOperatorApprox.build((1, 2), 2.5)


@pytest.mark.parametrize('letters', [(1,), (1, 2), (1, 2, 3, 4, 5)])
def test_eigenvalue_strictly_decreasing(letters):
    _, decreasing = eigenvalue_curve(letters, np.linspace(0.1, 1.5, 15))
    assert decreasing


def test_dimension_one_to_ten():
    estimate = estimate_dimension(range(1, 11), check_doubling=False)
    assert estimate.delta == pytest.approx(0.9257, abs=1e-3)


def test_dimension_one_two_exceeds_half_and_is_stable():
    estimate = estimate_dimension((1, 2))
    assert estimate.delta == pytest.approx(0.5313, abs=1e-3)
    assert estimate.delta > 0.5
    assert abs(estimate.delta_doubled - estimate.delta) <= 1e-3
    assert abs(estimate.residual) < 1e-6


def test_single_letter_is_degenerate():
    estimate = estimate_dimension((1,))
    assert estimate.delta == 0.0
    assert estimate.degenerate
    assert estimate.to_dict()['delta'] == 0.0


def test_dimension_monotone_in_alphabet():
    deltas = [estimate_dimension(range(1, top + 1), order=24, tol=1e-8, check_doubling=False).delta
              for top in range(2, 11)]
    assert all(b >= a for a, b in zip(deltas, deltas[1:]))


def test_dimension_rejects_tiny_tolerance():
    with pytest.raises(ValidationError):
        estimate_dimension((1, 2), tol=1e-13)


def test_estimator_reads_config():
    estimator = DimensionEstimator({'order': 16, 'tol': 1e-8, 'check_doubling': False})
    estimate = estimator.estimate((1, 2))
    assert estimate.order == 16
    assert estimate.delta_doubled is None
    assert estimate.delta == pytest.approx(0.5313, abs=1e-3)


@pytest.mark.slow
@pytest.mark.parametrize('letters, bounds', [
    ((1, 2), [50, 100, 200, 400, 800, 1600]),
    (tuple(range(1, 11)), [50, 100, 200, 400, 800]),
])
def test_dimension_agrees_with_ball_growth(letters, bounds):
    delta = estimate_dimension(letters, check_doubling=False).delta
    fit = hensley_fit(Alphabet(letters), bounds)
    assert abs(2 * delta - fit.slope) <= 0.1
