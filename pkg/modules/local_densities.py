"""
Local Densities Module
Exact local data: |SL2(q)|, chi_4, beta(q), rho(p), brute-force oracles and the linear-sieve condition
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from sympy import isprime, primerange

from .core_arith import factorize, is_squarefree
from .errors import BudgetExceededError, ValidationError

logger = logging.getLogger(__name__)

BRUTEFORCE_PRIME_CAP = 31


@dataclass(frozen=True)
class LocalDensity:
    """beta(q) with its per-prime data"""

    q: int
    beta: Fraction
    rho: dict = field(default_factory=dict)
    chi4: dict = field(default_factory=dict)

    def as_row(self):
        return {
            'q': self.q,
            'beta': f"{self.beta.numerator}/{self.beta.denominator}",
            'beta_float': float(self.beta),
        }


def chi4(n):
    """The non-principal Dirichlet character mod 4"""
    if n % 2 == 0:
        return 0
    return 1 if n % 4 == 1 else -1


def _require_squarefree(q):
    if q < 1:
        raise ValidationError(f"Modulus must be >= 1, got {q}")
    if not is_squarefree(q):
        raise ValidationError(f"Modulus {q} is not square-free")


def sl2_size(q):
    """|SL2(Z/q)| = q^3 prod_{p|q} (1 - p^-2)"""
    _require_squarefree(q)
    size = q ** 3
    for p in factorize(q):
        size = size // (p * p) * (p * p - 1)
    return size


def _beta_prime(p):
    return Fraction(1, p) * (1 + Fraction(chi4(p), p)) / (1 - Fraction(1, p * p))


def beta(q):
    """Density of trace = 0 (mod q) in SL2(q), multiplicative over p | q"""
    _require_squarefree(q)
    value = Fraction(1)
    for p in factorize(q):
        value *= _beta_prime(p)
    return value


def rho(p):
    """rho(p) = p(p + chi_4(p)) / (p^2 - 1) - 1"""
    if not isprime(p):
        raise ValidationError(f"rho is defined on primes, got {p}")
    return Fraction(p * (p + chi4(p)), p * p - 1) - 1


def local_density(q):
    _require_squarefree(q)
    primes = sorted(factorize(q))
    return LocalDensity(
        q=q,
        beta=beta(q),
        rho={p: rho(p) for p in primes},
        chi4={p: chi4(p) for p in primes},
    )


def _sl2_traces(q):
    """Traces mod q of every element of SL2(Z/q), vectorized over the entry cube"""
    a, b, c, d = np.meshgrid(*(np.arange(q, dtype=np.int64),) * 4, indexing='ij')
    unimodular = (a * d - b * c) % q == 1 % q
    return (a + d)[unimodular] % q


def sl2_size_bruteforce(q):
    """Exhaustive count over all q^4 matrices; small q only"""
    if q > BRUTEFORCE_PRIME_CAP:
        raise BudgetExceededError(f"Exhaustive SL2 enumeration refused for q={q}", estimate=q ** 4, cap=BRUTEFORCE_PRIME_CAP ** 4)
    return int(_sl2_traces(q).size)


def trace_zero_count_bruteforce(p):
    """#{gamma in SL2(F_p) : tr gamma = 0} by exhaustive enumeration"""
    if p > BRUTEFORCE_PRIME_CAP:
        raise BudgetExceededError(
            f"Exhaustive enumeration over SL2(F_{p}) refused", estimate=p ** 4, cap=BRUTEFORCE_PRIME_CAP ** 4
        )
    if not isprime(p):
        raise ValidationError(f"Expected a prime, got {p}")
    count = int(np.count_nonzero(_sl2_traces(p) == 0))
    logger.debug(f"SL2(F_{p}): {count} trace-zero elements")
    return count


def sieve_condition_ratio(w, z):
    """prod_{w<=p<z} (1 - beta(p))^-1 times log w / log z"""
    if w < 2:
        raise ValidationError(f"w must be >= 2, got {w}")
    if z <= w:
        raise ValidationError(f"z must exceed w, got w={w}, z={z}")
    product = 1.0
    for p in primerange(math.ceil(w), math.ceil(z)):
        product /= 1.0 - float(_beta_prime(int(p)))
    return product * math.log(w) / math.log(z)
