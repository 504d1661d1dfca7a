"""
Analytic Sums Module
SL2(Z) balls, the smoothed SL2 exponential sum, the theta-sum building blocks
G_X, S_r, J_X and additive energy counts
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import pandas as pd
from scipy import integrate, stats

from .core_arith import Mat2, is_squarefree
from .errors import BudgetExceededError, ConvergenceError, ValidationError

logger = logging.getLogger(__name__)

DEFAULT_SUPPORT = 20.0
PLATEAU = 10.0
DEFAULT_MAX_BALL = 32_000_000
DEFAULT_MAX_PAIRS = 2_000_000_000
LATTICE_DENSITY = 6.0
SL2_CHUNK = 2_000_000
QUAD_TOL = 1e-8
GL_NODES = 24


# ==================== BUMP FUNCTION ====================
@dataclass(frozen=True)
class BumpFunction:
    """
    Even mollifier supported on (-W, W), normalized to be >= 1 on [-10, 10]:
    phi(t) = exp(1 - 1/(1 - (t/W)^2)) / exp(1 - 1/(1 - (10/W)^2)).
    """

    width: float = DEFAULT_SUPPORT

    def __post_init__(self):
        if self.width <= PLATEAU:
            raise ValidationError(f"Support half-width must exceed {PLATEAU}, got {self.width}")

    @property
    def scale(self):
        return math.exp(1.0 - 1.0 / (1.0 - (PLATEAU / self.width) ** 2))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        u = np.clip((t / self.width) ** 2, 0.0, 1.0)
        inside = u < 1.0
        out = np.zeros_like(u)
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - u[inside])) / self.scale
        return out if out.ndim else float(out)

    def integral(self):
        value, _ = integrate.quad(self, -self.width, self.width, limit=200)
        return value

    def weight(self, a, b, c, d, X):
        """phi_X on the rotated coordinates (a+d, a-d, b+c, b-c)"""
        return self((a + d) / X) * self((a - d) / X) * self((b + c) / X) * self((b - c) / X)


# ==================== SL2(Z) BALLS ====================
@dataclass
class SL2Ball:
    """Entries of SL2(Z) elements as parallel int32 arrays"""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    _weights: dict = field(default_factory=dict, repr=False, compare=False)

    def __len__(self):
        return int(self.a.size)

    def matrices(self):
        for row in zip(self.a.tolist(), self.b.tolist(), self.c.tolist(), self.d.tolist()):
            yield Mat2(*row)

    def stacked(self):
        return np.stack([self.a, self.b, self.c, self.d], axis=1).astype(np.int64)

    def weights(self, X, bump):
        """phi_X over the ball, kept per (X, bump)"""
        key = (float(X), bump)
        if key not in self._weights:
            self._weights[key] = bump.weight(self.a, self.b, self.c, self.d, X)
        return self._weights[key]

    def linear_residues(self, s, q):
        """xi . s mod q for every element"""
        s = [int(v) % q for v in s]
        total = self.a.astype(np.int64) * s[0]
        total += self.b.astype(np.int64) * s[1]
        total += self.c.astype(np.int64) * s[2]
        total += self.d.astype(np.int64) * s[3]
        return total % q


def _inverse_table(m):
    """r -> r^(-1) mod m (0 where r is not a unit)"""
    return np.array([pow(r, -1, m) if math.gcd(r, m) == 1 else 0 for r in range(m)], dtype=np.int64)


def _sl2_points(limit, accept):
    """
    Every unimodular (a b; c d) with |entries| < limit passing accept(a, b, c, d).
    Rows are generated one c at a time: for coprime (c, d) the solutions are
    a = a0 + k c, b = b0 + k d with a0 d = 1 mod |c|, vectorized over d and k.
    """
    parts = []
    span = np.arange(-limit + 1, limit, dtype=np.int64)

    # c = 0 forces a = d = +-1
    for unit in (-1, 1):
        a = np.full_like(span, unit)
        cs = np.zeros_like(span)
        keep = accept(a, span, cs, a)
        if keep.any():
            parts.append(tuple(v[keep].astype(np.int32) for v in (a, span, cs, a)))

    for c in range(-limit + 1, limit):
        if c == 0:
            continue
        m = abs(c)
        ds = span[np.gcd(span, m) == 1]
        a0 = np.zeros_like(ds) if m == 1 else _inverse_table(m)[ds % m]
        reach = limit // m + 1
        ks = np.arange(-reach, reach + 1, dtype=np.int64)
        step = max(1, SL2_CHUNK // ks.size)
        for start in range(0, ds.size, step):
            d = ds[start:start + step, None]
            base = a0[start:start + step, None]
            a = base + ks[None, :] * m
            b = (a * d - 1) // c
            d = np.broadcast_to(d, a.shape)
            keep = (np.abs(a) < limit) & (np.abs(b) < limit)
            a, b, d = a[keep], b[keep], d[keep]
            cs = np.full_like(a, c)
            keep = accept(a, b, cs, d)
            if keep.any():
                parts.append(tuple(v[keep].astype(np.int32) for v in (a, b, cs, d)))

    if not parts:
        empty = np.zeros(0, dtype=np.int32)
        return SL2Ball(empty, empty, empty, empty)
    a, b, c, d = (np.concatenate(column) for column in zip(*parts))
    assert np.all(a * d - b * c == 1)
    return SL2Ball(a, b, c, d)


def _guard_ball(estimate, cap, label):
    if cap is not None and estimate > cap:
        raise BudgetExceededError(f"{label} too large", estimate=estimate, cap=cap)


def bump_support_ball(X, bump=None, max_count=DEFAULT_MAX_BALL):
    """All xi in SL2(Z) with |a+-d|, |b+-c| < W X, the support of phi_X"""
    bump = bump or BumpFunction()
    L = bump.width * X
    # the support sits inside the norm ball of radius sqrt(2) L
    _guard_ball(LATTICE_DENSITY * 2 * L * L, max_count, f"SL2 bump support at X={X}")
    limit = math.ceil(L)
    ball = _sl2_points(limit, lambda a, b, c, d: (np.abs(a) + np.abs(d) < L) & (np.abs(b) + np.abs(c) < L))
    logger.info(f"SL2 bump support at X={X}: {len(ball):,} elements")
    return ball


def sl2_norm_ball(X, max_count=DEFAULT_MAX_BALL):
    """All gamma in SL2(Z) with ||gamma|| < X"""
    _guard_ball(LATTICE_DENSITY * X * X, max_count, f"SL2 norm ball at X={X}")
    bound_sq = X * X
    return _sl2_points(math.ceil(X), lambda a, b, c, d: a * a + b * b + c * c + d * d < bound_sq)


def enumerate_sl2_ball(X, bump=None, max_count=DEFAULT_MAX_BALL):
    """Stream the support of phi_X, each element once"""
    yield from bump_support_ball(X, bump, max_count).matrices()


# ==================== EXPONENTIAL SUM ====================
@dataclass
class ExpSumResult:
    X: float
    q: int
    s: tuple
    value: complex
    rhs: float
    mass: float

    @property
    def ratio(self):
        return abs(self.value) / self.rhs

    def to_dict(self):
        return {
            'X': self.X,
            'q': self.q,
            's': list(self.s),
            'real': self.value.real,
            'imag': self.value.imag,
            'abs': abs(self.value),
            'rhs': self.rhs,
            'ratio': self.ratio,
        }


def exp_sum_rhs(X, q):
    """q^(-3/2) X^2 + X^(3/2) + q X"""
    return q ** -1.5 * X * X + X ** 1.5 + q * X


def exp_sum_sl2(X, q, s, bump=None, ball=None):
    """sum over xi of phi_X(xi) e_q(xi . s) by direct enumeration"""
    s = tuple(int(v) for v in s)
    if len(s) != 4:
        raise ValidationError(f"s must have 4 coordinates, got {s}")
    if math.gcd(*s) != 1:
        raise ValidationError(f"s = {s} is not primitive")
    if q < 1:
        raise ValidationError(f"q must be >= 1, got {q}")
    bump = bump or BumpFunction()
    ball = ball if ball is not None else bump_support_ball(X, bump)

    weights = ball.weights(X, bump)
    mass = float(np.sum(weights))
    if q == 1:
        return ExpSumResult(X, q, s, complex(mass), exp_sum_rhs(X, q), mass)
    # weight per residue class of xi . s, then one root of unity per class
    buckets = np.bincount(ball.linear_residues(s, q), weights=weights, minlength=q)
    value = complex(buckets @ np.exp(2j * np.pi * np.arange(q) / q))
    return ExpSumResult(X, q, s, value, exp_sum_rhs(X, q), mass)


def random_primitive_vector(rng, bound):
    while True:
        s = tuple(int(v) for v in rng.integers(-bound, bound + 1, size=4))
        if math.gcd(*s) == 1:
            return s


def exp_sum_regime(X_grid, samples=20, seed=0, constant=10.0, bump=None, max_count=DEFAULT_MAX_BALL):
    """
    |S(q)|/RHS(q) over square-free q <= X and random primitive s, against
    constant * |S(1)|/RHS(1) at the same X
    """
    bump = bump or BumpFunction()
    rng = np.random.default_rng(seed)
    rows = []
    for X in X_grid:
        ball = bump_support_ball(X, bump, max_count)
        baseline = exp_sum_sl2(X, 1, (1, 0, 0, 0), bump, ball).ratio
        for q in (q for q in range(1, int(X) + 1) if is_squarefree(q)):
            for _ in range(samples):
                s = random_primitive_vector(rng, max(int(X), 2))
                result = exp_sum_sl2(X, q, s, bump, ball)
                rows.append({
                    'X': X,
                    'q': q,
                    's': ','.join(map(str, s)),
                    'abs': abs(result.value),
                    'rhs': result.rhs,
                    'ratio': result.ratio,
                    'calibrated': result.ratio / baseline,
                    'within': result.ratio <= constant * baseline,
                })
        logger.info(f"Exponential sums at X={X}: ball {len(ball):,}, baseline ratio {baseline:.4g}")
    return pd.DataFrame(rows)


# ==================== THETA SUM BLOCKS ====================
def _phase(coefficient, values):
    """coefficient * values mod 1, exact when the coefficient is rational"""
    if isinstance(coefficient, (Fraction, int)):
        coefficient = Fraction(coefficient)
        num, den = coefficient.numerator, coefficient.denominator
        return ((num * values) % den) / den
    return np.mod(coefficient * values, 1.0)


def gauss_sum_Sr(r, a, k):
    """S_r(a; k) = (1/r) sum_{y mod r} e_r(a y^2 + k y)"""
    if r < 1:
        raise ValidationError(f"r must be >= 1, got {r}")
    if math.gcd(a, r) != 1:
        raise ValidationError(f"gcd({a}, {r}) > 1")
    y = np.arange(r, dtype=np.int64)
    residues = (a * y * y + k * y) % r
    return complex(np.mean(np.exp(2j * np.pi * residues / r)))


def theta_sum_GX(X, theta, lam, bump=None):
    """G_X(theta; lambda) = sum_x phi(x/X) e(theta x^2 + lambda x)"""
    if X < 1:
        raise ValidationError(f"X must be >= 1, got {X}")
    bump = bump or BumpFunction()
    top = math.ceil(bump.width * X)
    x = np.arange(-top, top + 1, dtype=np.int64)
    phase = _phase(theta, x * x) + _phase(lam, x)
    return complex(np.sum(bump(x / X) * np.exp(2j * np.pi * phase)))


def bump_mass(X, bump=None):
    """sum_x phi(x/X)"""
    return theta_sum_GX(X, 0, 0, bump).real


def _gauss_legendre(f, lo, hi, panels):
    nodes, weights = np.polynomial.legendre.leggauss(GL_NODES)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    points = mid[:, None] + half[:, None] * nodes[None, :]
    return np.sum(half[:, None] * weights[None, :] * f(points))


def oscillatory_JX(X, beta, z, bump=None, tol=QUAD_TOL):
    """
    J_X(beta; z) = integral of phi(x/X) e(beta x^2 + z x) dx, computed as
    X * integral over u of phi(u) e(beta X^2 u^2 + z X u).
    """
    bump = bump or BumpFunction()
    W = bump.width
    beta = float(beta)
    z = float(z)

    if beta == 0.0:
        omega = 2 * np.pi * z * X
        if omega == 0.0:
            real, err = integrate.quad(bump, -W, W, limit=200, epsabs=tol)
        else:
            real, err = integrate.quad(bump, -W, W, weight='cos', wvar=omega, limit=500, epsabs=tol)
        if err > tol * max(1.0, X):
            raise ConvergenceError(f"Quadrature error {err:.2e} for J_X(0; {z}) at X={X}")
        # phi is even, so the sine part vanishes
        return complex(X * real, 0.0)

    def integrand(u):
        return bump(u) * np.exp(2j * np.pi * (beta * X * X * u * u + z * X * u))

    cycles = 2 * (abs(beta) * X * X * W * W + abs(z) * X * W)
    panels = max(64, math.ceil(2 * cycles))
    coarse = _gauss_legendre(integrand, -W, W, panels)
    fine = _gauss_legendre(integrand, -W, W, 2 * panels)
    if abs(fine - coarse) > tol * max(1.0, abs(fine)):
        raise ConvergenceError(
            f"Composite quadrature unstable for J_X({beta}; {z}) at X={X}: {abs(fine - coarse):.2e}"
        )
    return complex(X * fine)


def stationary_phase_bound(X, beta):
    """min(X, |beta|^(-1/2))"""
    return X if beta == 0 else min(X, abs(beta) ** -0.5)


def theta_decomposition(r, a, lam, X, K=20, bump=None):
    """sum_{|k| <= K} S_r(a; k) J_X(0; lambda - k/r)"""
    bump = bump or BumpFunction()
    lam = Fraction(lam) if isinstance(lam, (int, Fraction)) else lam
    total = 0j
    for k in range(-K, K + 1):
        total += gauss_sum_Sr(r, a, k) * oscillatory_JX(X, 0, float(lam - Fraction(k, r)), bump)
    return total


# ==================== ADDITIVE ENERGY ====================
@dataclass
class EnergyReport:
    X: float
    ball_size: int
    energy: int
    difference_energy: int
    zero_difference: int
    difference_total: int
    distinct_sums: int

    @property
    def diagonal(self):
        """2 |ball|^2 - |ball|"""
        return 2 * self.ball_size ** 2 - self.ball_size

    def to_dict(self):
        return {
            'X': self.X,
            'ball': self.ball_size,
            'E': self.energy,
            'diffE': self.difference_energy,
            'N0': self.zero_difference,
            'sum_N': self.difference_total,
            'diagonal': self.diagonal,
        }


def _pack(vectors, base):
    """Exact int64 key for 4-vectors with entries in (-base/2, base/2)"""
    shifted = vectors + base // 2
    return ((shifted[..., 0] * base + shifted[..., 1]) * base + shifted[..., 2]) * base + shifted[..., 3]


def _pair_slices(points, sign, base):
    """
    Multiplicities of gamma_1 +- gamma_2 over ordered pairs, one value of the
    first coordinate at a time; yields (first coordinate, keys, counts).
    """
    order = np.argsort(points[:, 0], kind='stable')
    ordered = points[order]
    values, starts, sizes = np.unique(ordered[:, 0], return_index=True, return_counts=True)
    groups = {int(v): ordered[s:s + n] for v, s, n in zip(values, starts, sizes)}
    lo, hi = int(values[0]), int(values[-1])
    targets = range(2 * lo, 2 * hi + 1) if sign > 0 else range(lo - hi, hi - lo + 1)
    for target in targets:
        blocks = []
        for first, left in groups.items():
            right = groups.get(target - first if sign > 0 else first - target)
            if right is not None:
                blocks.append(_pack(left[:, None, :] + sign * right[None, :, :], base).ravel())
        if blocks:
            keys, counts = np.unique(np.concatenate(blocks), return_counts=True)
            yield target, keys, counts


def additive_energy(X, max_pairs=DEFAULT_MAX_PAIRS):
    """E(X) = sum_v #{gamma_1 + gamma_2 = v}^2 over the norm ball, with the difference counts N_M"""
    ball = sl2_norm_ball(X)
    size = len(ball)
    if size * size > max_pairs:
        raise BudgetExceededError(f"Energy at X={X} needs {size}^2 pairs", estimate=size * size, cap=max_pairs)
    if not size:
        return EnergyReport(X, 0, 0, 0, 0, 0, 0)

    points = ball.stacked()
    base = 4 * math.ceil(X) + 2
    energy = distinct = 0
    for _, _, counts in _pair_slices(points, 1, base):
        energy += int(np.sum(counts.astype(np.int64) ** 2))
        distinct += int(counts.size)

    zero_key = int(_pack(np.zeros(4, dtype=np.int64), base))
    difference_energy = difference_total = zero = 0
    for target, keys, counts in _pair_slices(points, -1, base):
        difference_energy += int(np.sum(counts.astype(np.int64) ** 2))
        difference_total += int(counts.sum())
        if target == 0:
            at = int(np.searchsorted(keys, zero_key))
            if at < keys.size and keys[at] == zero_key:
                zero = int(counts[at])

    report = EnergyReport(
        X=X,
        ball_size=size,
        energy=energy,
        difference_energy=difference_energy,
        zero_difference=zero,
        difference_total=difference_total,
        distinct_sums=distinct,
    )
    logger.info(f"Energy at X={X}: ball {size:,}, E={report.energy:,}")
    return report


def energy_growth(X_grid, max_pairs=DEFAULT_MAX_PAIRS):
    """Energy table over a grid with the fitted exponent of E(X)"""
    reports = [additive_energy(X, max_pairs) for X in X_grid]
    table = pd.DataFrame([r.to_dict() for r in reports])
    fit = stats.linregress(np.log(table['X'].astype(float)), np.log(table['E'].astype(float)))
    table['fit'] = fit.slope
    return table, fit.slope


# ==================== CONFIGURED ENGINE ====================
class SL2Sums:
    """Bump-support balls, exponential sums and energy counts under one configuration"""

    def __init__(self, config):
        self.config = config
        self.bump = BumpFunction(config.get('bump_width', DEFAULT_SUPPORT))
        self._balls = {}

    @property
    def max_ball(self):
        return self.config.get('max_ball', DEFAULT_MAX_BALL)

    def ball(self, X):
        """Support of phi_X, built once per X"""
        if X not in self._balls:
            self._balls[X] = bump_support_ball(X, self.bump, self.max_ball)
        return self._balls[X]

    def exp_sum(self, X, q, s):
        return exp_sum_sl2(X, q, s, self.bump, self.ball(X))

    def regime(self, X_grid, seed=0):
        return exp_sum_regime(
            X_grid,
            samples=self.config.get('expsum_samples', 20),
            seed=seed,
            constant=self.config.get('expsum_constant', 10.0),
            bump=self.bump,
            max_count=self.max_ball,
        )

    def energy_growth(self, X_grid):
        return energy_growth(X_grid, self.config.get('max_pairs', DEFAULT_MAX_PAIRS))
