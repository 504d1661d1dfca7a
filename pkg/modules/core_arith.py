"""
Core Arithmetic Module
Exact integer, rational, quadratic-irrational and continued-fraction arithmetic
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache, reduce

from sympy import factorint

from .errors import BudgetExceededError, ValidationError

logger = logging.getLogger(__name__)

# trial division to 10^7 plus a 64-bit cofactor
DEFAULT_FACTOR_LIMIT = 10**7 * 2**64
DEFAULT_PELL_SCAN_CAP = 100_000
MAX_SURD_STEPS = 1_000_000


# ==================== MATRICES ====================
@dataclass(frozen=True, slots=True)
class Mat2:
    """2x2 integer matrix (a b; c d)"""

    a: int
    b: int
    c: int
    d: int

    @classmethod
    def identity(cls):
        return cls(1, 0, 0, 1)

    @classmethod
    def generator(cls, a):
        """The continued-fraction generator (a 1; 1 0)"""
        return cls(a, 1, 1, 0)

    def __matmul__(self, other):
        return Mat2(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def __add__(self, other):
        return Mat2(self.a + other.a, self.b + other.b, self.c + other.c, self.d + other.d)

    def __sub__(self, other):
        return Mat2(self.a - other.a, self.b - other.b, self.c - other.c, self.d - other.d)

    def __pow__(self, exponent):
        result = Mat2.identity()
        base = self
        while exponent:
            if exponent & 1:
                result = result @ base
            base = base @ base
            exponent >>= 1
        return result

    @property
    def det(self):
        return self.a * self.d - self.b * self.c

    @property
    def trace(self):
        return self.a + self.d

    @property
    def norm_sq(self):
        """tr(M tM)"""
        return self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d

    @property
    def norm(self):
        return math.sqrt(self.norm_sq)

    @property
    def discriminant(self):
        """D_M = tr(M)^2 - 4 det(M)"""
        return self.trace * self.trace - 4 * self.det

    def is_identity(self):
        return self.a == 1 and self.b == 0 and self.c == 0 and self.d == 1

    def mod(self, q):
        return Mat2(self.a % q, self.b % q, self.c % q, self.d % q)

    def mul_mod(self, other, q):
        return (self @ other).mod(q)

    def as_tuple(self):
        return (self.a, self.b, self.c, self.d)

    def __str__(self):
        return f"({self.a} {self.b}; {self.c} {self.d})"


def word_matrix(word):
    """Product g_{a1} g_{a2} ... of generators for a word of partial quotients"""
    result = Mat2.identity()
    for letter in word:
        result = result @ Mat2.generator(letter)
    return result


# ==================== FACTORIZATION ====================
@lru_cache(maxsize=65536)
def _factorint_cached(n):
    return tuple(sorted((int(p), int(e)) for p, e in factorint(n).items()))


def factorize(n, limit=DEFAULT_FACTOR_LIMIT):
    """Prime factorization as {p: e}; refuses inputs beyond the desk-scale limit"""
    if n < 1:
        raise ValidationError(f"Cannot factor {n}: expected a positive integer")
    if n > limit:
        raise BudgetExceededError(f"Refusing to factor {n}", estimate=n, cap=limit)
    return dict(_factorint_cached(n))


def squarefree_part(n, limit=DEFAULT_FACTOR_LIMIT):
    """Return (sqf, root) with n = sqf * root^2 and sqf square-free"""
    if n == 0:
        raise ValidationError("squarefree_part(0) is undefined")
    if n < 0:
        raise ValidationError(f"squarefree_part expects n >= 1, got {n}")
    sqf, root = 1, 1
    for p, e in factorize(n, limit).items():
        if e % 2:
            sqf *= p
        root *= p ** (e // 2)
    return sqf, root


def fundamental_discriminant(n, limit=DEFAULT_FACTOR_LIMIT):
    """sqf(n) when it is 1 mod 4, otherwise 4*sqf(n)"""
    sqf, _ = squarefree_part(n, limit)
    return sqf if sqf % 4 == 1 else 4 * sqf


def is_squarefree(n, limit=DEFAULT_FACTOR_LIMIT):
    if n < 1:
        return False
    return all(e == 1 for e in factorize(n, limit).values())


def almost_prime_class(n, limit=DEFAULT_FACTOR_LIMIT):
    """Omega(n): number of prime factors counted with multiplicity"""
    return sum(factorize(n, limit).values())


def is_almost_prime(n, R, limit=DEFAULT_FACTOR_LIMIT):
    return almost_prime_class(n, limit) <= R


def mobius(n):
    factors = factorize(n)
    if any(e > 1 for e in factors.values()):
        return 0
    return -1 if len(factors) % 2 else 1


def is_square(n):
    return n >= 0 and math.isqrt(n) ** 2 == n


# ==================== QUADRATIC IRRATIONALS ====================
@dataclass(frozen=True)
class QuadraticIrrational:
    """(p + q*sqrt(D)) / r in canonical form"""

    p: int
    q: int
    r: int
    D: int

    @classmethod
    def of(cls, p, q, r, D):
        """Canonicalize: D square-free, r > 0, gcd(p, q, r) = 1"""
        if r == 0:
            raise ValidationError("Denominator r must be nonzero")
        if D <= 0:
            raise ValidationError(f"Radicand must be positive, got {D}")
        if q == 0 or is_square(D):
            raise ValidationError(f"({p} + {q}*sqrt({D}))/{r} is rational")
        sqf, root = squarefree_part(D)
        q *= root
        if r < 0:
            p, q, r = -p, -q, -r
        g = reduce(math.gcd, (p, q, r))
        return cls(p // g, q // g, r // g, sqf)

    @classmethod
    def sqrt(cls, n):
        return cls.of(0, 1, 1, n)

    def __float__(self):
        return (self.p + self.q * math.sqrt(self.D)) / self.r

    def conjugate(self):
        return QuadraticIrrational(self.p, -self.q, self.r, self.D)

    def floor(self):
        """Exact floor using integer square roots"""
        s = math.isqrt(self.q * self.q * self.D)
        if self.q > 0:
            return (self.p + s) // self.r
        return (self.p - s - 1) // self.r

    def sign(self):
        """Exact sign of the value"""
        lhs = self.p
        rhs_sq = self.q * self.q * self.D
        if self.q > 0:
            # p + sqrt(rhs_sq) > 0 ?
            return 1 if lhs >= 0 or lhs * lhs < rhs_sq else -1
        return 1 if lhs > 0 and lhs * lhs > rhs_sq else -1

    def compare(self, value):
        """Exact sign of self - value for a rational value"""
        value = Fraction(value)
        shifted = QuadraticIrrational(
            self.p * value.denominator - value.numerator * self.r,
            self.q * value.denominator,
            self.r * value.denominator,
            self.D,
        )
        return shifted.sign()

    def mobius(self, a, b, c, d):
        """(a x + b) / (c x + d) computed exactly"""
        u1, v1 = a * self.p + b * self.r, a * self.q
        u2, v2 = c * self.p + d * self.r, c * self.q
        norm = u2 * u2 - v2 * v2 * self.D
        if norm == 0:
            raise ValidationError("Fractional-linear image is undefined (pole)")
        # (u1 + v1 w)(u2 - v2 w) / (u2^2 - v2^2 D)
        p = u1 * u2 - v1 * v2 * self.D
        q = v1 * u2 - u1 * v2
        return QuadraticIrrational.of(p, q, norm, self.D)

    def act(self, M):
        return self.mobius(M.a, M.b, M.c, M.d)

    def is_reduced(self):
        """Galois condition: x > 1 and -1 < conjugate < 0"""
        conj = self.conjugate()
        return self.compare(1) > 0 and conj.compare(0) < 0 and conj.compare(-1) > 0

    def __str__(self):
        return f"({self.p} + {self.q}*sqrt({self.D}))/{self.r}"


# ==================== CONTINUED FRACTIONS ====================
@dataclass(frozen=True)
class ContinuedFraction:
    """[a0; a1, ..., ak, (period)] with an empty period for rationals"""

    preperiod: tuple = ()
    period: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, 'preperiod', tuple(int(a) for a in self.preperiod))
        object.__setattr__(self, 'period', tuple(int(a) for a in self.period))
        terms = self.preperiod + self.period
        if not terms:
            raise ValidationError("Continued fraction needs at least one partial quotient")
        # a0 may be any integer, later partial quotients are positive
        if any(a < 1 for a in terms[1:]):
            raise ValidationError(f"Partial quotients must be >= 1: {list(terms)}")

    @property
    def is_finite(self):
        return not self.period

    @property
    def is_purely_periodic(self):
        return bool(self.period) and not self.preperiod

    def terms(self):
        return list(self.preperiod) + list(self.period)

    def __str__(self):
        head = ', '.join(map(str, self.preperiod))
        if not self.period:
            return f"[{head}]"
        tail = ', '.join(map(str, self.period))
        return f"[{head}; ({tail})]" if head else f"[({tail})]"


def cf_convergents(partial_quotients):
    """List of convergents (p_k, q_k)"""
    p_prev, p = 1, partial_quotients[0]
    q_prev, q = 0, 1
    convergents = [(p, q)]
    for a in partial_quotients[1:]:
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
        convergents.append((p, q))
    return convergents


def cf_expand_rational(numerator, denominator):
    """Euclidean algorithm; canonical form has last partial quotient >= 2"""
    if denominator < 1:
        raise ValidationError(f"Denominator must be >= 1, got {denominator}")
    if math.gcd(numerator, denominator) != 1:
        raise ValidationError(
            f"{numerator}/{denominator} is not in lowest terms "
            f"(gcd = {math.gcd(numerator, denominator)})"
        )
    terms = []
    n, d = numerator, denominator
    while d:
        a, rem = divmod(n, d)
        terms.append(a)
        n, d = d, rem
    # Euclid always ends with a partial quotient >= 2 when length > 1
    return ContinuedFraction(preperiod=tuple(terms))


def _surd_state(x):
    """Write x = (P + sqrt(d)) / Q with Q | d - P^2"""
    p, q, r = x.p, x.q, x.r
    if q < 0:
        p, q, r = -p, -q, -r
    d = q * q * x.D
    P, Q = p, r
    if (d - P * P) % Q:
        P *= abs(Q)
        d *= Q * Q
        Q *= abs(Q)
    return P, Q, d


def _surd_floor(P, Q, s):
    """floor((P + sqrt(d)) / Q) given s = isqrt(d), d not a square"""
    if Q > 0:
        return (P + s) // Q
    return (P + s + 1) // Q


def cf_expand_quadratic(x, max_steps=MAX_SURD_STEPS):
    """Eventually periodic expansion via the (P, Q) recurrence with cycle detection"""
    if not isinstance(x, QuadraticIrrational):
        raise ValidationError(f"Expected a QuadraticIrrational, got {type(x).__name__}")
    if is_square(x.D):
        raise ValidationError(f"Degenerate radicand {x.D} is a perfect square")

    P, Q, d = _surd_state(x)
    s = math.isqrt(d)
    seen = {}
    terms = []
    while (P, Q) not in seen:
        if len(terms) >= max_steps:
            raise BudgetExceededError("Surd expansion did not cycle", estimate=len(terms), cap=max_steps)
        seen[(P, Q)] = len(terms)
        a = _surd_floor(P, Q, s)
        terms.append(a)
        P = a * Q - P
        Q = (d - P * P) // Q

    start = seen[(P, Q)]
    cf = ContinuedFraction(preperiod=tuple(terms[:start]), period=tuple(terms[start:]))
    assert cf.is_purely_periodic == x.is_reduced(), f"Galois condition violated for {x}"
    logger.debug(f"Expanded {x} -> {cf}")
    return cf


def periodic_fixed_point(period):
    """The purely periodic value [(a1, ..., al)] as an exact surd"""
    M = word_matrix(period)
    # c y^2 + (d - a) y - b = 0, take the root > 1
    disc = (M.d - M.a) ** 2 + 4 * M.b * M.c
    return QuadraticIrrational.of(M.a - M.d, 1, 2 * M.c, disc)


def cf_evaluate(cf):
    """Inverse of the expansions: Fraction for finite, QuadraticIrrational otherwise"""
    if cf.is_finite:
        terms = cf.terms()
        value = Fraction(terms[-1])
        for a in reversed(terms[:-1]):
            value = a + 1 / value
        return value
    y = periodic_fixed_point(cf.period)
    if not cf.preperiod:
        return y
    return y.act(word_matrix(cf.preperiod))


# ==================== PELL EQUATION ====================
@dataclass(frozen=True)
class PellSolution:
    """t^2 - discriminant * s^2 = 4"""

    t: int
    s: int
    discriminant: int

    def __post_init__(self):
        if self.t * self.t - self.discriminant * self.s * self.s != 4:
            raise ValidationError(f"({self.t}, {self.s}) does not solve t^2 - {self.discriminant} s^2 = 4")


def _order_generator(disc):
    """A reduced-cycle surd whose order has the given discriminant"""
    if disc % 4 == 1:
        return QuadraticIrrational.of(1, 1, 2, disc)
    return QuadraticIrrational.sqrt(disc // 4)


def pell_fundamental(delta, scan_cap=DEFAULT_PELL_SCAN_CAP):
    """Minimal solution t > 2 of t^2 - delta s^2 = 4"""
    if delta <= 0:
        raise ValidationError(f"Pell discriminant must be positive, got {delta}")
    if is_square(delta):
        raise ValidationError(f"Pell discriminant {delta} is a perfect square")

    order_disc = delta if delta % 4 in (0, 1) else 4 * delta
    period = cf_expand_quadratic(_order_generator(order_disc)).period
    M = word_matrix(period)
    t = M.trace if M.det == 1 else (M @ M).trace
    s = math.isqrt((t * t - 4) // delta)
    solution = PellSolution(t, s, delta)

    # bounded exhaustive minimality check below the candidate
    for s_small in range(1, min(s, scan_cap)):
        if is_square(delta * s_small * s_small + 4):
            raise AssertionError(f"Smaller Pell solution s={s_small} found below candidate {solution}")
    if s > scan_cap:
        logger.debug(f"Pell minimality scan for delta={delta} capped at s={scan_cap}")
    return solution
