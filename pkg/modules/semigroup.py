"""
Semigroup Module
Norm-ball enumeration of Gamma_A, trace multiplicities, mod-q closures and admissibility
"""
from __future__ import annotations

import itertools
import logging
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import pandas as pd
from scipy import stats
from sympy import divisor_count

from .core_arith import Mat2, is_squarefree, word_matrix
from .errors import BudgetExceededError, ValidationError

logger = logging.getLogger(__name__)

DEFAULT_MAX_BALL = 10_000_000
PILOT_BOUNDS = (30.0, 60.0)


# ==================== DOMAIN TYPES ====================
@dataclass(frozen=True)
class Alphabet:
    """Finite set of allowed partial quotients"""

    letters: tuple

    def __post_init__(self):
        letters = tuple(sorted(set(int(a) for a in self.letters)))
        if not letters:
            raise ValidationError("Alphabet must be nonempty")
        if letters[0] < 1:
            raise ValidationError(f"Partial quotients must be >= 1, got {letters[0]}")
        object.__setattr__(self, 'letters', letters)

    @classmethod
    def parse(cls, text):
        """Parse '1,2,5' or '1-10' (ranges may be mixed with commas)"""
        letters = []
        try:
            for chunk in str(text).split(','):
                chunk = chunk.strip()
                if not chunk:
                    continue
                if '-' in chunk:
                    lo, hi = chunk.split('-', 1)
                    letters.extend(range(int(lo), int(hi) + 1))
                else:
                    letters.append(int(chunk))
        except ValueError as e:
            raise ValidationError(f"Malformed alphabet '{text}': {e}") from e
        return cls(tuple(letters))

    @classmethod
    def range(cls, top):
        return cls(tuple(range(1, top + 1)))

    @property
    def contains_one_two(self):
        return 1 in self.letters and 2 in self.letters

    @property
    def all_even(self):
        return all(a % 2 == 0 for a in self.letters)

    def pair_products(self):
        """g_a g_b = (ab+1 a; b 1) as tuples, ordered by (a, b)"""
        return [(a * b + 1, a, b, 1) for a in self.letters for b in self.letters]

    def __len__(self):
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __str__(self):
        return '{' + ','.join(map(str, self.letters)) + '}'


@dataclass
class TraceStats:
    """Trace multiplicities M_A(t) over a norm ball"""

    norm_bound: float
    multiplicities: dict = field(default_factory=dict)
    total: int = 0
    max_trace: int | None = None

    @classmethod
    def from_counter(cls, norm_bound, counter, max_trace=None):
        multiplicities = dict(sorted(counter.items()))
        return cls(norm_bound, multiplicities, sum(multiplicities.values()), max_trace)

    @property
    def traces(self):
        return list(self.multiplicities)

    def multiplicity(self, t):
        return self.multiplicities.get(t, 0)

    def count_divisible(self, q):
        return sum(m for t, m in self.multiplicities.items() if t % q == 0)

    def residue_counts(self, q):
        counts = Counter()
        for t, m in self.multiplicities.items():
            counts[t % q] += m
        return counts

    def to_frame(self):
        return pd.DataFrame(
            {'t': list(self.multiplicities), 'multiplicity': list(self.multiplicities.values())}
        )

    def to_csv(self, path):
        self.to_frame().to_csv(path, index=False)
        return path


@dataclass(frozen=True)
class ModularClosure:
    """Reduction of Gamma_A modulo q"""

    modulus: int
    elements: frozenset
    trace_residues: frozenset

    @property
    def size(self):
        return len(self.elements)


@dataclass
class HensleyFit:
    """Least-squares slope of log(count) against log(N)"""

    slope: float
    intercept: float
    bounds: list
    counts: list
    residuals: list

    def to_frame(self):
        return pd.DataFrame({'N': self.bounds, 'count': self.counts, 'residual': self.residuals})


@dataclass
class AdmissibilityResult:
    admissible: bool
    witness: int | None
    q_max: int

    def __bool__(self):
        return self.admissible


# ==================== ENUMERATION ====================
def _explore(root, rows, bound_sq, max_trace):
    """Depth-first walk below an even-length product; yields tuples"""
    stack = [root]
    while stack:
        m11, m12, m21, m22 = node = stack.pop()
        yield node
        for row in rows:
            # entries grow with both letters, so the first failure ends the row
            pruned_row = True
            for p11, p12, p21, p22 in row:
                c11 = m11 * p11 + m12 * p21
                c12 = m11 * p12 + m12 * p22
                c21 = m21 * p11 + m22 * p21
                c22 = m21 * p12 + m22 * p22
                if c11 * c11 + c12 * c12 + c21 * c21 + c22 * c22 >= bound_sq:
                    break
                if max_trace is not None and c11 + c22 > max_trace:
                    break
                pruned_row = False
                stack.append((c11, c12, c21, c22))
            if pruned_row:
                break


def _prepare_pairs(alphabet):
    """g_a g_b grouped into rows by the first letter a"""
    products = alphabet.pair_products()
    width = len(alphabet)
    return [products[i * width:(i + 1) * width] for i in range(width)]


def _bound_sq(N):
    return math.inf if N is None else N * N


def _identity_in_ball(N, max_trace):
    return (N is None or 2 < N * N) and (max_trace is None or max_trace >= 2)


def _children_of_identity(alphabet, N, max_trace):
    """Length-2 words inside the ball: the partition keys for parallel runs"""
    bound_sq = _bound_sq(N)
    roots = []
    for p in alphabet.pair_products():
        if p[0] ** 2 + p[1] ** 2 + p[2] ** 2 + p[3] ** 2 >= bound_sq:
            continue
        if max_trace is not None and p[0] + p[3] > max_trace:
            continue
        roots.append(p)
    return roots


def _iter_tuples(alphabet, N, max_trace=None):
    if not _identity_in_ball(N, max_trace):
        return
    yield from _explore((1, 0, 0, 1), _prepare_pairs(alphabet), _bound_sq(N), max_trace)


def estimate_ball_size(alphabet, N, max_trace=None):
    """Pilot-count extrapolation ~ N^(2 delta) used by the memory guards"""
    if max_trace is not None:
        # the top-left continuant is the largest entry, so norm < 2 * trace
        effective = 2.0 * max_trace if N is None else min(N, 2.0 * max_trace)
    else:
        effective = N
    if effective is None or effective <= PILOT_BOUNDS[1]:
        return sum(1 for _ in _iter_tuples(alphabet, effective, None))
    lo, hi = PILOT_BOUNDS
    count_lo = sum(1 for _ in _iter_tuples(alphabet, lo))
    count_hi = sum(1 for _ in _iter_tuples(alphabet, hi))
    slope = math.log(count_hi / count_lo) / math.log(hi / lo) if count_hi > count_lo else 0.0
    return count_hi * (effective / hi) ** slope


def _guard(alphabet, N, max_trace, max_count):
    if max_count is None:
        return
    estimate = estimate_ball_size(alphabet, N, max_trace)
    if estimate > max_count:
        raise BudgetExceededError(
            f"Ball of Gamma_{alphabet} with N={N}, max_trace={max_trace} is too large",
            estimate=estimate,
            cap=max_count,
        )


def enumerate_ball(alphabet, N, max_trace=None, max_count=DEFAULT_MAX_BALL, callback=None, progress_every=None):
    """
    Stream every element of Gamma_A with norm < N (and trace <= max_trace when given).
    The identity is included; each element is produced exactly once.
    """
    _guard(alphabet, N, max_trace, max_count)
    for emitted, node in enumerate(_iter_tuples(alphabet, N, max_trace), start=1):
        M = Mat2(*node)
        if callback is not None:
            callback(M)
        if progress_every and emitted % progress_every == 0:
            logger.info(f"Gamma_{alphabet} ball N={N}: {emitted:,} elements so far")
        yield M


def _count_subtree(args):
    root, alphabet_letters, N, max_trace = args
    alphabet = Alphabet(alphabet_letters)
    counter = Counter()
    for node in _explore(root, _prepare_pairs(alphabet), _bound_sq(N), max_trace):
        counter[node[0] + node[3]] += 1
    return counter


def trace_multiplicities(alphabet, N, max_trace=None, max_count=DEFAULT_MAX_BALL, workers=1):
    """Multiplicity map t -> M_A(t) over the ball; partitioned by length-2 prefix"""
    _guard(alphabet, N, max_trace, max_count)
    counter = Counter()
    if not _identity_in_ball(N, max_trace):
        return TraceStats.from_counter(N, counter, max_trace)

    counter[2] += 1
    roots = _children_of_identity(alphabet, N, max_trace)
    jobs = [(root, alphabet.letters, N, max_trace) for root in roots]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(_count_subtree, jobs))
    else:
        partials = [_count_subtree(job) for job in jobs]
    # merge in prefix order
    for partial in partials:
        counter.update(partial)

    result = TraceStats.from_counter(N, counter, max_trace)
    logger.info(f"Gamma_{alphabet} ball N={N}: {result.total:,} elements, {len(result.multiplicities):,} traces")
    return result


def ball_counts(alphabet, bounds, max_count=DEFAULT_MAX_BALL):
    """Ball sizes for several bounds from one enumeration at the largest"""
    bounds = [float(N) for N in bounds]
    top = max(bounds)
    _guard(alphabet, top, None, max_count)
    norms_sq = np.fromiter(
        (a * a + b * b + c * c + d * d for a, b, c, d in _iter_tuples(alphabet, top)),
        dtype=np.float64,
    )
    norms_sq.sort()
    return [int(np.searchsorted(norms_sq, N * N, side='left')) for N in bounds]


def _fit_loglog(xs, ys):
    fit = stats.linregress(np.log(xs), np.log(ys))
    residuals = list(np.log(ys) - (fit.intercept + fit.slope * np.log(xs)))
    return fit.slope, fit.intercept, residuals


def hensley_fit(alphabet, bounds, max_count=DEFAULT_MAX_BALL):
    """Fitted growth exponent of the ball size, expected near 2 delta_A"""
    bounds = list(bounds)
    if len(bounds) < 3:
        raise ValidationError(f"Need at least 3 norm bounds, got {len(bounds)}")
    if any(b2 <= b1 for b1, b2 in zip(bounds, bounds[1:])):
        raise ValidationError(f"Norm bounds must be increasing: {bounds}")
    counts = ball_counts(alphabet, bounds, max_count)
    if len(set(counts)) == 1:
        raise ValidationError(f"Degenerate counts {counts}: ball size constant over {bounds}")
    slope, intercept, residuals = _fit_loglog(bounds, counts)
    logger.info(f"Hensley fit for Gamma_{alphabet}: slope {slope:.4f} over N={bounds}")
    return HensleyFit(slope, intercept, bounds, counts, residuals)


def words_of_length(alphabet, length):
    """Every word of the given length with its matrix"""
    return [(word, word_matrix(word)) for word in itertools.product(alphabet.letters, repeat=length)]


def primitivity_gcd(alphabet, N, max_count=DEFAULT_MAX_BALL):
    """gcd of all traces in the ball"""
    stats_ = trace_multiplicities(alphabet, N, max_count=max_count)
    if not stats_.total:
        raise ValidationError(f"Ball of norm {N} is empty")
    return math.gcd(*stats_.traces)


# ==================== MODULAR CLOSURE ====================
@lru_cache(maxsize=256)
def _closure(letters, q):
    generators = [tuple(x % q for x in p) for p in Alphabet(letters).pair_products()]
    identity = (1 % q, 0, 0, 1 % q)
    seen = {identity}
    frontier = [identity]
    while frontier:
        next_frontier = []
        for m11, m12, m21, m22 in frontier:
            for p11, p12, p21, p22 in generators:
                child = (
                    (m11 * p11 + m12 * p21) % q,
                    (m11 * p12 + m12 * p22) % q,
                    (m21 * p11 + m22 * p21) % q,
                    (m21 * p12 + m22 * p22) % q,
                )
                if child not in seen:
                    seen.add(child)
                    next_frontier.append(child)
        frontier = next_frontier
    traces = frozenset((m[0] + m[3]) % q for m in seen)
    return frozenset(seen), traces


def closure_mod_q(alphabet, q):
    """BFS fixed point from the identity under right multiplication by g_a g_b mod q"""
    if q < 1:
        raise ValidationError(f"Modulus must be >= 1, got {q}")
    elements, traces = _closure(alphabet.letters, q)
    logger.debug(f"Closure of Gamma_{alphabet} mod {q}: {len(elements)} elements")
    return ModularClosure(q, elements, traces)


def is_admissible(alphabet, t, q_max):
    """t is admissible iff it is a trace residue mod every square-free q <= q_max"""
    if q_max < 2:
        raise ValidationError(f"q_max must be >= 2, got {q_max}")
    for q in range(2, q_max + 1):
        if not is_squarefree(q):
            continue
        if t % q not in closure_mod_q(alphabet, q).trace_residues:
            return AdmissibilityResult(False, q, q_max)
    return AdmissibilityResult(True, None, q_max)


# ==================== TRACE SET STATISTICS ====================
def trace_multiplicity_ceiling(t):
    """Divisor-argument ceiling: sum over a of tau(a(t-a) - 1), identity counted once"""
    if t < 2:
        return 0
    total = 1 if t == 2 else 0
    for a in range(1, t):
        n = a * (t - a) - 1
        if n >= 1:
            total += int(divisor_count(n))
    return total


def distinct_trace_growth(alphabet, bounds, max_count=DEFAULT_MAX_BALL):
    """Fitted exponent of #(T_A cap [1, N]); the lower bound predicts 2 delta - 1"""
    bounds = sorted(int(b) for b in bounds)
    if len(bounds) < 3:
        raise ValidationError(f"Need at least 3 bounds, got {len(bounds)}")
    stats_ = trace_multiplicities(alphabet, None, max_trace=bounds[-1], max_count=max_count)
    traces = np.array(stats_.traces)
    counts = [int(np.count_nonzero(traces <= b)) for b in bounds]
    slope, intercept, residuals = _fit_loglog(bounds, counts)
    return HensleyFit(slope, intercept, bounds, counts, residuals)


def local_global_exceptions(alphabet, t_max, q_max, max_count=DEFAULT_MAX_BALL, workers=1):
    """Admissible 1 <= t <= t_max with M_A(t) = 0"""
    stats_ = trace_multiplicities(alphabet, None, max_trace=t_max, max_count=max_count, workers=workers)
    exceptions = [
        t for t in range(1, t_max + 1)
        if stats_.multiplicity(t) == 0 and is_admissible(alphabet, t, q_max)
    ]
    logger.info(f"Gamma_{alphabet}: {len(exceptions)} admissible unrepresented traces <= {t_max}")
    return exceptions


# ==================== CONFIGURED ENUMERATOR ====================
class BallEnumerator:
    """Ball enumeration of Gamma_A under one budget and worker configuration"""

    def __init__(self, config):
        self.config = config

    @property
    def max_ball(self):
        return self.config.get('max_ball', DEFAULT_MAX_BALL)

    @property
    def workers(self):
        return self.config.get('workers', 1)

    def enumerate(self, alphabet, N, max_trace=None):
        return enumerate_ball(
            alphabet, N, max_trace, self.max_ball, progress_every=self.config.get('progress_every')
        )

    def trace_multiplicities(self, alphabet, N, max_trace=None):
        return trace_multiplicities(alphabet, N, max_trace, self.max_ball, self.workers)

    def hensley_fit(self, alphabet, bounds):
        return hensley_fit(alphabet, bounds, self.max_ball)

    def local_global_exceptions(self, alphabet, t_max, q_max):
        return local_global_exceptions(alphabet, t_max, q_max, self.max_ball, self.workers)
