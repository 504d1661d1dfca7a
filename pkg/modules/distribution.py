"""
Distribution Module
Level-of-distribution experiments: remainders r_q(N), the aleph construction,
the sequence a_N, its main-term decomposition and the error sums E, E_1
"""
from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import pandas as pd
from sympy import divisors

from .core_arith import Mat2, is_squarefree, mobius
from .errors import BudgetExceededError, ValidationError
from .local_densities import beta, sl2_size
from .semigroup import Alphabet, enumerate_ball, trace_multiplicities

logger = logging.getLogger(__name__)

DEFAULT_ALEPH_MODULUS = 2
DEFAULT_REP_NORM_CAP = 200.0
DEFAULT_MAX_TRIPLES = 50_000_000
INT64_SAFE = 2 ** 62
BASE_ALPHABET = Alphabet((1, 2))


def squarefree_below(bound, start=1):
    """Square-free integers in [start, bound)"""
    return [q for q in range(max(1, start), math.ceil(bound)) if is_squarefree(q)]


def ramanujan_sum(q, n):
    """c_q(n) = sum over d | gcd(q, n) of mu(q/d) d"""
    g = math.gcd(q, n)
    return sum(mobius(q // d) * d for d in divisors(g))


# ==================== REMAINDERS ====================
def remainder_rq(stats, q):
    """r_q(N) = #{tr = 0 mod q} - total/q over the ball, with multiplicity"""
    if q < 1 or not is_squarefree(q):
        raise ValidationError(f"Remainders are taken over square-free q, got {q}")
    return Fraction(stats.count_divisible(q)) - Fraction(stats.total, q)


@dataclass
class DistributionReport:
    N: float
    alphabet: Alphabet
    remainders: list
    total: int
    table: pd.DataFrame = field(repr=False)

    def remainder(self, q):
        return dict(self.remainders)[q]


def level_sweep(alphabet, N, alpha_grid, stats=None, max_count=None, workers=1):
    """Ratio sum_{square-free q < N^alpha} |r_q| / total for each alpha"""
    alpha_grid = sorted(float(a) for a in alpha_grid)
    if not alpha_grid or alpha_grid[0] <= 0 or alpha_grid[-1] >= 1:
        raise ValidationError(f"alpha grid must lie in (0, 1), got {alpha_grid}")
    if stats is None:
        kwargs = {'workers': workers}
        if max_count is not None:
            kwargs['max_count'] = max_count
        stats = trace_multiplicities(alphabet, N, **kwargs)

    moduli = squarefree_below(N ** alpha_grid[-1])
    remainders = [(q, remainder_rq(stats, q)) for q in moduli]

    rows = []
    for alpha in alpha_grid:
        Q = N ** alpha
        sum_abs = sum((abs(r) for q, r in remainders if q < Q), Fraction(0))
        rows.append({
            'alpha': alpha,
            'Q': Q,
            'sum_abs_r': float(sum_abs),
            'total': stats.total,
            'ratio': float(sum_abs / stats.total) if stats.total else 0.0,
        })
    table = pd.DataFrame(rows, columns=['alpha', 'Q', 'sum_abs_r', 'total', 'ratio'])
    logger.info(f"Level sweep for Gamma_{alphabet} at N={N}: {len(moduli)} moduli, total {stats.total:,}")
    return DistributionReport(N, alphabet, remainders, stats.total, table)


# ==================== ALEPH ====================
@dataclass
class AlephSet:
    bound: float
    modulus: int
    elements: list
    T: float = 0.0
    representatives: dict = field(default_factory=dict)
    pivot: Mat2 | None = None
    discrepancies: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.elements)

    @classmethod
    def singleton(cls, element=None):
        element = element or Mat2.identity()
        return cls(bound=element.norm * 1.0001, modulus=1, elements=[element])

    def measure(self, moduli):
        for q in moduli:
            self.discrepancies[q] = equidistribution_discrepancy(self.elements, q)
        return self.discrepancies


def _class_representatives(B, norm_cap):
    """Smallest-norm element of Gamma_{1,2} in every class of SL2(B)"""
    wanted = sl2_size(B)
    found = {}
    bound = 4.0
    while True:
        ball = sorted(enumerate_ball(BASE_ALPHABET, bound, max_count=None), key=lambda M: (M.norm_sq, M.as_tuple()))
        for M in ball:
            found.setdefault(M.mod(B).as_tuple(), M)
        if len(found) == wanted or bound >= norm_cap:
            break
        bound = min(2 * bound, norm_cap)
    if len(found) < wanted:
        a, b, c, d = np.meshgrid(*(np.arange(B),) * 4, indexing='ij')
        unimodular = ((a * d - b * c) % B) == (1 % B)
        classes = {tuple(int(x) for x in m) for m in np.stack([a, b, c, d], axis=-1)[unimodular]}
        missing = sorted(classes - set(found))
        raise BudgetExceededError(
            f"No representative below norm {norm_cap} for {len(missing)} classes mod {B}: {missing[:10]}",
            estimate=None,
            cap=norm_cap,
        )
    return found


def construct_aleph(Y, B=DEFAULT_ALEPH_MODULUS, rep_norm_cap=DEFAULT_REP_NORM_CAP):
    """
    Special set equidistributed mod B inside the ball of radius Y in Gamma_{1,2}.

    S(T) is the T-ball with T = (Y / max ||x_j||)^(1/R), R = |SL2(B)|. The most
    populous class mod B gives S'(T) and its first element s_T; then
    aleph = disjoint union over classes j of S'(T) s_T^(R-1) x_j.
    """
    if B < 1 or not is_squarefree(B):
        raise ValidationError(f"Aleph modulus must be square-free, got {B}")
    R = sl2_size(B)
    reps = _class_representatives(B, rep_norm_cap)
    scale = max(1.0 if M.is_identity() else M.norm for M in reps.values())
    T = (Y / scale) ** (1.0 / R)

    ball = list(enumerate_ball(BASE_ALPHABET, T, max_count=None))
    if not ball:
        raise BudgetExceededError(f"S(T) is empty for Y={Y}, B={B} (T={T:.4f})", estimate=T, cap=math.sqrt(2))

    by_class = {}
    for M in sorted(ball, key=Mat2.as_tuple):
        by_class.setdefault(M.mod(B).as_tuple(), []).append(M)
    # largest class, ties broken by residue order
    _, S_prime = max(sorted(by_class.items()), key=lambda item: len(item[1]))
    pivot = S_prime[0]
    tail = pivot ** (R - 1)

    elements = []
    for residue in sorted(reps):
        x = reps[residue]
        elements.extend(s @ tail @ x for s in S_prime)
    assert all(M.norm < Y for M in elements)

    logger.info(f"Aleph(Y={Y}, B={B}): T={T:.3f}, |S(T)|={len(ball)}, |S'|={len(S_prime)}, |aleph|={len(elements)}")
    return AlephSet(Y, B, elements, T, reps, pivot)


def equidistribution_discrepancy(elements, q):
    """max over classes a_0 of SL2(q) of |#{a = a_0 mod q}/|S| - 1/|SL2(q)||"""
    elements = list(elements)
    if not elements:
        raise ValidationError("Discrepancy of an empty set is undefined")
    R = sl2_size(q)
    counts = Counter(M.mod(q).as_tuple() for M in elements)
    size = len(elements)
    worst = max(abs(Fraction(c, size) - Fraction(1, R)) for c in counts.values())
    if len(counts) < R:
        worst = max(worst, Fraction(1, R))
    return worst


# ==================== SEQUENCE a_N ====================
@dataclass
class SequenceA:
    alphabet: Alphabet
    X: float
    Y: float
    Z: float
    xi: list = field(repr=False)
    aleph: AlephSet = field(repr=False)
    omega: list = field(repr=False)
    counts: dict = field(default_factory=dict, repr=False)

    @property
    def size(self):
        """|A| = sum_n a_N(n)"""
        return sum(self.counts.values())

    @property
    def N(self):
        return self.X * self.Y * self.Z

    def value(self, n):
        return self.counts.get(n, 0)

    def count_in_class(self, q):
        return sum(a for n, a in self.counts.items() if n % q == 0)

    def to_frame(self):
        return pd.DataFrame({'n': list(self.counts), 'a_N': list(self.counts.values())})


def _stack(matrices):
    return np.array([[[M.a, M.b], [M.c, M.d]] for M in matrices], dtype=np.int64).reshape(-1, 2, 2)


def _triple_traces(xi, middle, omega):
    """tr(xi a omega) for all pairs, as (values, counts)"""
    left = np.einsum('xij,jk->xik', _stack(xi), _stack([middle])[0])
    traces = np.einsum('xij,wji->xw', left, _stack(omega))
    return np.unique(traces, return_counts=True)


def _check_triples(xi, aleph_elements, omega, max_triples):
    triples = len(xi) * len(aleph_elements) * len(omega)
    if max_triples is not None and triples > max_triples:
        raise BudgetExceededError("Sequence build too large", estimate=triples, cap=max_triples)
    top = max(M.norm for M in xi) * max(M.norm for M in aleph_elements) * max(M.norm for M in omega)
    if 4 * top >= INT64_SAFE:
        raise BudgetExceededError("Triple products overflow 64-bit accumulation", estimate=top, cap=INT64_SAFE)


def build_sequence_aN(alphabet, X, Y, Z, aleph, max_triples=DEFAULT_MAX_TRIPLES):
    """a_N(n) = sum over xi in Xi, a in aleph, omega in Omega of 1_{n = tr(xi a omega)}"""
    xi = list(enumerate_ball(alphabet, X, max_count=None))
    omega = list(enumerate_ball(alphabet, Z, max_count=None))
    if not xi or not omega:
        raise ValidationError(f"Empty ball: |Xi|={len(xi)} (X={X}), |Omega|={len(omega)} (Z={Z})")
    _check_triples(xi, aleph.elements, omega, max_triples)

    counts = Counter()
    for middle in aleph.elements:
        values, multiplicity = _triple_traces(xi, middle, omega)
        counts.update(dict(zip(values.tolist(), multiplicity.tolist())))

    sequence = SequenceA(alphabet, X, Y, Z, xi, aleph, omega, dict(sorted(counts.items())))
    expected = len(xi) * len(aleph) * len(omega)
    assert sequence.size == expected, f"|A| = {sequence.size} != |Xi||aleph||Omega| = {expected}"
    logger.info(f"a_N built: |Xi|={len(xi)}, |aleph|={len(aleph)}, |Omega|={len(omega)}, support {len(counts)}")
    return sequence


# ==================== MAIN TERMS ====================
@dataclass
class MainTermResult:
    modulus: int
    q0: float
    count_in_class: int
    main_term: Fraction
    remainder: Fraction
    main_term_numeric: complex
    beta_prediction: Fraction
    divisors_used: list

    @property
    def deviation(self):
        """M_q - beta(q)|A|"""
        return self.main_term - self.beta_prediction


def character_sum(counts, q):
    """sum_n sum'_{r mod q} e_q(rn) a(n), compensated summation over every term"""
    if q == 1:
        return complex(sum(counts.values()))
    n = np.fromiter(counts.keys(), dtype=np.int64, count=len(counts))
    a = np.fromiter(counts.values(), dtype=np.float64, count=len(counts))
    r = np.array([x for x in range(1, q) if math.gcd(x, q) == 1], dtype=np.int64)
    phase = np.outer(r, n % q) % q
    terms = np.exp(2j * np.pi * phase / q) * a[None, :]
    return complex(math.fsum(terms.real.ravel()), math.fsum(terms.imag.ravel()))


def main_term_decomposition(sequence, modulus, Q0):
    """Split |A_q| = M_q + r(q) with M_q from the divisors q | modulus below Q0 (q = 1 always kept)"""
    if modulus < 1 or not is_squarefree(modulus):
        raise ValidationError(f"Modulus must be square-free, got {modulus}")
    used = [q for q in divisors(modulus) if q == 1 or q < Q0]

    exact = sum(
        (ramanujan_sum(q, n) * a for q in used for n, a in sequence.counts.items()),
        0,
    )
    main_term = Fraction(exact, modulus)
    numeric = sum((character_sum(sequence.counts, q) for q in used), 0j) / modulus
    if abs(numeric.imag) > 1e-8 * max(sequence.size, 1):
        logger.warning(f"Character sum imaginary part {numeric.imag:.3e} exceeds tolerance (q={modulus})")

    in_class = sequence.count_in_class(modulus)
    return MainTermResult(
        modulus=modulus,
        q0=Q0,
        count_in_class=in_class,
        main_term=main_term,
        remainder=in_class - main_term,
        main_term_numeric=numeric,
        beta_prediction=beta(modulus) * sequence.size,
        divisors_used=used,
    )


# ==================== ERROR SUMS ====================
@dataclass
class E1Result:
    Q: float
    moduli: list
    value: int
    xi_size: int
    omega_size: int
    bound5: float
    bound6: float

    @property
    def magnitude(self):
        return abs(self.value)

    @property
    def ratio5(self):
        return self.magnitude / self.bound5

    @property
    def ratio6(self):
        return self.magnitude / self.bound6

    def to_dict(self):
        return {
            'Q': self.Q,
            'moduli': self.moduli,
            'value': self.magnitude,
            'signed_value': self.value,
            'xi': self.xi_size,
            'omega': self.omega_size,
            'bound5': self.bound5,
            'bound6': self.bound6,
            'ratio5': self.ratio5,
            'ratio6': self.ratio6,
        }


def bound_major(Q, xi_size, omega_size, X):
    """Q |Xi|^(1/2) |Omega| X [|Omega|^(-1/6) + Q/X^(1/4) + Q^2/X^(1/2)]"""
    bracket = omega_size ** (-1 / 6) + Q / X ** 0.25 + Q ** 2 / X ** 0.5
    return Q * math.sqrt(xi_size) * omega_size * X * bracket


def bound_minor(Q, omega_size, X, Z):
    """Q |Omega|^(1/2) X^2 Z [Q^(1/2)/Z^(1/2) + Q^(-1/8)]"""
    bracket = math.sqrt(Q / Z) + Q ** (-1 / 8)
    return Q * math.sqrt(omega_size) * X ** 2 * Z * bracket


def _e1_from_balls(xi, omega, middle, moduli):
    values, multiplicity = _triple_traces(xi, middle, omega)
    return sum(
        ramanujan_sum(q, int(n)) * int(m)
        for q in moduli
        for n, m in zip(values.tolist(), multiplicity.tolist())
    )


def error_sum_E1(alphabet, Q, middle, X, Z, moduli=None, max_triples=DEFAULT_MAX_TRIPLES):
    """E_1(Q; a) = sum_{q ~ Q} sum_{xi, omega} c_q(tr(xi a omega)), q square-free in [Q, 2Q)"""
    if Q < 1:
        raise ValidationError(f"Q must be >= 1, got {Q}")
    xi = list(enumerate_ball(alphabet, X, max_count=None))
    omega = list(enumerate_ball(alphabet, Z, max_count=None))
    if not xi or not omega:
        raise ValidationError(f"Empty ball: |Xi|={len(xi)} (X={X}), |Omega|={len(omega)} (Z={Z})")
    _check_triples(xi, [middle], omega, max_triples)
    moduli = list(moduli) if moduli is not None else squarefree_below(2 * Q, start=math.ceil(Q))

    value = _e1_from_balls(xi, omega, middle, moduli)
    result = E1Result(
        Q=Q,
        moduli=moduli,
        value=value,
        xi_size=len(xi),
        omega_size=len(omega),
        bound5=bound_major(Q, len(xi), len(omega), X),
        bound6=bound_minor(Q, len(omega), X, Z),
    )
    logger.info(f"E1(Q={Q}): |E1|={result.magnitude}, ratio5={result.ratio5:.3e}, ratio6={result.ratio6:.3e}")
    return result


@dataclass
class ErrorSumReport:
    direct: Fraction
    dyadic: float
    table: pd.DataFrame = field(repr=False)

    @property
    def within_dyadic(self):
        return float(self.direct) <= self.dyadic


def error_sum_total(sequence, Q0, level):
    """
    E = sum_{square-free q < level} |r(q)| directly, beside the dyadic aggregate
    log(level) * sum_{a in aleph} sum_{Q dyadic} |E_1(Q; a)| / Q.
    """
    if level <= 1:
        raise ValidationError(f"Level must exceed 1, got {level}")
    direct = sum(
        (abs(main_term_decomposition(sequence, q, Q0).remainder) for q in squarefree_below(level)),
        Fraction(0),
    )

    rows = []
    Q = 1
    while Q < level:
        # the remainder only sees moduli at or above Q0
        moduli = [q for q in squarefree_below(min(2 * Q, level), start=Q) if q >= Q0]
        if moduli:
            worst = 0
            total = 0.0
            for middle in sequence.aleph.elements:
                magnitude = abs(_e1_from_balls(sequence.xi, sequence.omega, middle, moduli))
                worst = max(worst, magnitude)
                total += magnitude / Q
            rows.append({'Q': Q, 'moduli': len(moduli), 'max_abs_e1': worst, 'sum_abs_e1_over_Q': total})
        Q *= 2

    table = pd.DataFrame(rows, columns=['Q', 'moduli', 'max_abs_e1', 'sum_abs_e1_over_Q'])
    dyadic = math.log(level) * float(table['sum_abs_e1_over_Q'].sum()) if rows else 0.0
    logger.info(f"E(level={level}) = {float(direct):.6g}; dyadic aggregate {dyadic:.6g}")
    return ErrorSumReport(direct, dyadic, table)
