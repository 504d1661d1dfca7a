"""
Geodesics Module
Fixed points, geodesic heights, discriminant sets, Pell-trace searches and almost-prime censuses
"""
from __future__ import annotations

import itertools
import logging
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field

import pandas as pd

from .core_arith import (
    QuadraticIrrational,
    almost_prime_class,
    cf_expand_quadratic,
    fundamental_discriminant,
    is_square,
    periodic_fixed_point,
    squarefree_part,
)
from .errors import ValidationError
from .semigroup import DEFAULT_MAX_BALL, enumerate_ball, trace_multiplicities

logger = logging.getLogger(__name__)


def fixed_point(M):
    """Attracting root of c x^2 + (d - a) x - b = 0"""
    D = M.discriminant
    if D <= 0 or abs(M.trace) <= 2:
        raise ValidationError(f"{M} is not hyperbolic (trace {M.trace})")
    if M.c == 0:
        raise ValidationError(f"{M} fixes infinity (c = 0)")
    if is_square(D):
        raise ValidationError(f"{M} has rational fixed points (D_M = {D} is a square)")
    sign = 1 if M.trace > 0 else -1
    alpha = QuadraticIrrational.of(M.a - M.d, sign, 2 * M.c, D)
    assert alpha.act(M) == alpha, f"{alpha} is not fixed by {M}"
    return alpha


def _check_period(period):
    period = [int(a) for a in period]
    if not period:
        raise ValidationError("Period must be nonempty")
    if any(a < 1 for a in period):
        raise ValidationError(f"Partial quotients must be >= 1: {period}")
    return period


def geodesic_height(period):
    """
    Apex height of the highest semicircle along the closed geodesic: the max over
    cyclic positions i of (alpha_i + beta_i)/2 with alpha_i = [a_i; a_i+1, ...]
    and beta_i = [0; a_i-1, a_i-2, ...].
    """
    period = _check_period(period)
    length = len(period)
    heights = []
    for i in range(length):
        forward = period[i:] + period[:i]
        backward = [period[(i - 1 - j) % length] for j in range(length)]
        alpha = float(periodic_fixed_point(forward))
        beta = 1.0 / float(periodic_fixed_point(backward))
        heights.append((alpha + beta) / 2)
    return round(max(heights), 9)


@dataclass
class ClosedGeodesic:
    matrix: object
    fixed_point: QuadraticIrrational
    period: tuple
    discriminant: int
    squarefree: int
    fundamental: int

    @property
    def height(self):
        return geodesic_height(self.period)

    def to_dict(self):
        return {
            'matrix': str(self.matrix),
            'fixed_point': str(self.fixed_point),
            'period': list(self.period),
            'D': self.discriminant,
            'sqf': self.squarefree,
            'fundamental': self.fundamental,
            'height': self.height,
        }


def closed_geodesic(M):
    alpha = fixed_point(M)
    cf = cf_expand_quadratic(alpha)
    D = M.discriminant
    sqf, _ = squarefree_part(D)
    return ClosedGeodesic(M, alpha, cf.period, D, sqf, fundamental_discriminant(D))


# ==================== DISCRIMINANTS ====================
@dataclass
class DiscriminantSet:
    table: pd.DataFrame = field(repr=False)

    @property
    def values(self):
        """sqf(t^2 - 4) -> number of distinct traces reaching it"""
        return Counter(self.table['sqf'].tolist())

    @property
    def distinct(self):
        return set(self.table['sqf'].tolist())


def discriminant_set(alphabet, N, R=None, stats=None, max_count=DEFAULT_MAX_BALL):
    """{sqf(t^2 - 4) : t in T_A, t >= 3} over the ball of norm N"""
    stats = stats or trace_multiplicities(alphabet, N, max_count=max_count)
    rows = []
    for t, multiplicity in stats.multiplicities.items():
        if t < 3:
            # t = 2 gives D = 0
            continue
        D = t * t - 4
        sqf, root = squarefree_part(D)
        omega = almost_prime_class(sqf)
        row = {
            't': t,
            'multiplicity': multiplicity,
            'D': D,
            'sqf': sqf,
            'root': root,
            'fundamental': fundamental_discriminant(D),
            'omega': omega,
        }
        if R is not None:
            row['almost_prime'] = omega <= R
        rows.append(row)
    table = pd.DataFrame(rows, columns=['t', 'multiplicity', 'D', 'sqf', 'root', 'fundamental', 'omega']
                         + (['almost_prime'] if R is not None else []))
    logger.info(f"D_A for Gamma_{alphabet}, N={N}: {table['sqf'].nunique() if rows else 0} distinct fields")
    return DiscriminantSet(table)


@dataclass
class PellTrace:
    t: int
    s: int
    witnesses: list


def pell_trace_search(alphabet, delta, N, max_count=DEFAULT_MAX_BALL):
    """Traces t in the ball with t^2 - delta s^2 = 4 for some s >= 1, with witnesses"""
    if delta <= 0 or is_square(delta):
        raise ValidationError(f"Pell discriminant must be a positive non-square, got {delta}")
    by_trace = defaultdict(list)
    for M in enumerate_ball(alphabet, N, max_count=max_count):
        by_trace[M.trace].append(M)

    found = []
    for t in sorted(by_trace):
        numerator = t * t - 4
        if numerator <= 0 or numerator % delta:
            continue
        s_sq = numerator // delta
        if is_square(s_sq):
            found.append(PellTrace(t, math.isqrt(s_sq), by_trace[t]))
    logger.info(f"Pell traces for delta={delta} in Gamma_{alphabet}, N={N}: {[p.t for p in found]}")
    return found


# ==================== CENSUSES ====================
def almost_prime_census(values, R):
    """Count and fraction of values with at most R prime factors"""
    values = list(values)
    if not values:
        return 0, 0.0
    count = sum(1 for n in values if almost_prime_class(n) <= R)
    return count, count / len(values)


def _is_primitive_word(word):
    length = len(word)
    return all(word != word[k:] + word[:k] for k in range(1, length) if length % k == 0)


def arithmetic_chaos_census(alphabet, length, field_radicand):
    """Per period length: primitive words over A whose periodic value lies in Q(sqrt(field))"""
    target, _ = squarefree_part(field_radicand)
    if target == 1:
        raise ValidationError(f"{field_radicand} is a square; Q(sqrt) is not a real quadratic field")
    rows = []
    for L in range(1, length + 1):
        words = 0
        hits = 0
        for word in itertools.product(alphabet.letters, repeat=L):
            word = list(word)
            if not _is_primitive_word(word):
                continue
            words += 1
            if periodic_fixed_point(word).D == target:
                hits += 1
        rows.append({'length': L, 'words': words, 'in_field': hits})
    return pd.DataFrame(rows, columns=['length', 'words', 'in_field'])
