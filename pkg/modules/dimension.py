"""
Dimension Module
Hausdorff dimension of the Cantor set C_A from the Gauss-map transfer operator
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import BarycentricInterpolator

from .errors import ConvergenceError, ValidationError

logger = logging.getLogger(__name__)

DEFAULT_ORDER = 32
MIN_ORDER = 8
POWER_TOL = 1e-12
POWER_MAX_ITER = 20_000
BRACKET = (0.01, 0.999)


def chebyshev_nodes(order):
    """Chebyshev points of the first kind mapped to [0, 1]"""
    k = np.arange(order)
    return np.sort(0.5 * (1.0 + np.cos((2 * k + 1) * np.pi / (2 * order))))


@dataclass
class TransferOperatorApprox:
    """
    Collocation of L_s f(x) = sum_a (a+x)^(-2s) f(1/(a+x)) at Chebyshev nodes.

    Row j of the matrix holds the branch weights at x_j times the Lagrange basis
    evaluated at the branch images 1/(a + x_j).
    """

    alphabet: tuple
    s: float
    order: int
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    matrix: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, alphabet, s, order=DEFAULT_ORDER):
        letters = tuple(alphabet)
        if order < MIN_ORDER:
            raise ValidationError(f"Collocation order must be >= {MIN_ORDER}, got {order}")
        if not 0.0 <= s < 2.0:
            raise ValidationError(f"s must lie in [0, 2), got {s}")

        nodes = chebyshev_nodes(order)
        basis = BarycentricInterpolator(nodes, np.eye(order))
        shifted = np.add.outer(nodes, np.asarray(letters, dtype=float))  # (order, |A|)
        weights = shifted ** (-2.0 * s)
        if not np.all(weights > 0):
            raise ConvergenceError(f"Non-positive branch weight at s={s}")

        matrix = np.zeros((order, order))
        # fixed summation order over letters
        for column in range(len(letters)):
            matrix += weights[:, column, None] * basis(1.0 / shifted[:, column])
        return cls(letters, float(s), order, nodes, weights.sum(axis=1), matrix)

    def leading_eigenvalue(self, tol=POWER_TOL, max_iter=POWER_MAX_ITER):
        """Power iteration from the constant function"""
        v = np.ones(self.order)
        estimate = 0.0
        for iteration in range(1, max_iter + 1):
            w = self.matrix @ v
            pivot = np.argmax(np.abs(w))
            new_estimate = w[pivot] / v[pivot]
            v = w / np.abs(w[pivot])
            if abs(new_estimate - estimate) <= tol * abs(new_estimate):
                logger.debug(f"Power iteration converged in {iteration} steps at s={self.s}")
                return float(new_estimate)
            estimate = new_estimate
        raise ConvergenceError(
            f"Power iteration did not converge in {max_iter} steps (s={self.s}, order={self.order})"
        )


def transfer_eigenvalue(alphabet, s, order=DEFAULT_ORDER, tol=POWER_TOL):
    """Leading eigenvalue lambda(s) of the collocated transfer operator"""
    return TransferOperatorApprox.build(alphabet, s, order).leading_eigenvalue(tol)


def eigenvalue_curve(alphabet, s_grid, order=DEFAULT_ORDER):
    """lambda on a grid of s values, with a strict-decrease flag"""
    values = [transfer_eigenvalue(alphabet, s, order) for s in s_grid]
    decreasing = all(b < a for a, b in zip(values, values[1:]))
    if not decreasing:
        logger.warning(f"lambda(s) not strictly decreasing for {tuple(alphabet)} on {list(s_grid)}")
    return values, decreasing


@dataclass
class DimensionEstimate:
    alphabet: tuple
    delta: float
    order: int
    residual: float
    delta_doubled: float | None = None
    stable: bool = True
    degenerate: bool = False
    iterations: int = 0

    def to_dict(self):
        return {
            'alphabet': list(self.alphabet),
            'delta': self.delta,
            'order': self.order,
            'residual': self.residual,
            'delta_doubled': self.delta_doubled,
            'stable': self.stable,
            'degenerate': self.degenerate,
        }


def _bisect(letters, order, tol):
    lo, hi = BRACKET
    lam_lo = transfer_eigenvalue(letters, lo, order)
    if lam_lo < 1.0:
        raise ConvergenceError(f"Bracketing failure: lambda({lo}) = {lam_lo:.6f} < 1")
    lam_hi = transfer_eigenvalue(letters, hi, order)
    if lam_hi > 1.0:
        raise ConvergenceError(f"Bracketing failure: lambda({hi}) = {lam_hi:.6f} > 1")

    iterations = 0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if transfer_eigenvalue(letters, mid, order) > 1.0:
            lo = mid
        else:
            hi = mid
        iterations += 1
    return 0.5 * (lo + hi), iterations


def estimate_dimension(alphabet, order=DEFAULT_ORDER, tol=1e-10, check_doubling=True):
    """The unique s with lambda(s) = 1, by bisection"""
    letters = tuple(alphabet)
    if not letters:
        raise ValidationError("Alphabet must be nonempty")
    if tol < 1e-12:
        raise ValidationError(f"Tolerance below 1e-12 is not supported, got {tol}")

    if len(letters) == 1:
        # a single branch has a one-point limit set
        logger.info(f"Alphabet {letters} is a single letter; delta = 0")
        return DimensionEstimate(letters, 0.0, order, 0.0, 0.0, True, True, 0)

    delta, iterations = _bisect(letters, order, tol)
    residual = transfer_eigenvalue(letters, delta, order) - 1.0
    estimate = DimensionEstimate(letters, delta, order, residual, iterations=iterations)

    if check_doubling:
        doubled, _ = _bisect(letters, 2 * order, tol)
        estimate.delta_doubled = doubled
        estimate.stable = abs(doubled - delta) <= 10 * tol
        if not estimate.stable:
            logger.warning(
                f"Order doubling moved delta by {abs(doubled - delta):.2e} (order {order} -> {2 * order})"
            )

    logger.info(f"delta_{letters} = {delta:.10f} (order {order}, residual {residual:.2e})")
    return estimate


class DimensionEstimator:
    """estimate_dimension with the collocation order and tolerance taken from a config dict"""

    def __init__(self, config):
        self.config = config

    def estimate(self, alphabet):
        return estimate_dimension(
            alphabet,
            order=self.config.get('order', DEFAULT_ORDER),
            tol=self.config.get('tol', 1e-10),
            check_doubling=self.config.get('check_doubling', True),
        )
