"""
Experiment Runner Module
Validated experiment configurations and dispatch to the library modules
"""
from __future__ import annotations

import logging
import math
import time
from dataclasses import asdict, dataclass

import numpy as np
import pandas as pd

from . import analytic_sums, core_arith, dimension, distribution, geodesics, local_densities, semigroup
from .core_arith import Mat2
from .errors import ValidationError
from .report_writer import ReportWriter
from .semigroup import Alphabet

logger = logging.getLogger(__name__)

# command -> (required parameters, formula tag of the quantity, written into every header)
COMMANDS = {
    'ball': (('alphabet', 'N'), 'B_A(N) = {gamma in Gamma_A : ||gamma|| < N}'),
    'traces': (('alphabet', 'N'), 'M_A(t) = #{gamma in B_A(N) : tr gamma = t}'),
    'figure3': (('alphabet', 't_max'), 'M_A(t) / t^(2 delta_A - 1) for 2 <= t <= t_max'),
    'ratios': (('alphabet', 't_max'), 'M_A(t) / t^(2 delta_A - 1) for 2 <= t <= t_max'),
    'dimension': (('alphabet',), 'delta_A = unique s with spectral radius of L_s equal to 1'),
    'beta': (('q',), 'beta(q) = #{g in SL2(Z/q) : tr g = 0} / |SL2(Z/q)|'),
    'level': (('alphabet', 'N', 'alpha_grid'), 'sum_{q < N^alpha} |r_q(N)| / |B_A(N)|, r_q = #{q | t} - |B_A(N)|/q'),
    'aleph': (('Y', 'B'), 'aleph(Y, B) = lifts of SL2(Z/B) with norm < Y, discrepancy mod q'),
    'sequence': (('alphabet', 'X', 'Y', 'Z'), 'a_N(n) = #{(xi, a, omega) : tr(xi a omega) = n}'),
    'e1': (('alphabet', 'Q', 'X', 'Z'), 'E_1(Q; a) = sum_{q ~ Q} sum_{xi, omega} c_q(tr(xi a omega))'),
    'expsum': (('X', 'q', 's'), 'S(q, s) = sum_xi phi_X(xi) e_q(xi . s)'),
    'regime': (('grid',), '|S(q, s)| / (q^(-3/2) X^2 + X^(3/2) + q X) against 10 |S(1)| / RHS(1)'),
    'gauss': (('r', 'a', 'k'), 'S_r(a; k) = (1/r) sum_{y mod r} e_r(a y^2 + k y)'),
    'energy': (('grid',), 'E(X) = #{g1 + g2 = g3 + g4 : ||g_i|| < X}'),
    'geodesic': (('period',), 'Y(gamma) = max height of the closed geodesic with the given period'),
    'discriminants': (('alphabet', 'N'), 'D_A(N) = {sqf(t^2 - 4) : t in T_A, t < N}'),
    'pell': (('alphabet', 'delta', 'N'), '{t in T_A : t^2 - delta s^2 = 4, s >= 1}'),
    'exceptions': (('alphabet', 't_max', 'q_max'), '{t <= t_max admissible mod q <= q_max : M_A(t) = 0}'),
    'chaos': (('alphabet', 'length', 'radicand'), '#{purely periodic [a_1, ..., a_n] in Q(sqrt(radicand))}'),
}

XYZ_TOLERANCE = 1e-6


@dataclass
class ExperimentConfig:
    """One validated experiment; every field lands in the output header"""

    command: str
    alphabet: Alphabet | None = None
    N: float | None = None
    X: float | None = None
    Y: float | None = None
    Z: float | None = None
    Q: float | None = None
    Q0: float | None = None
    alpha_grid: list | None = None
    B: int = 2
    order: int = dimension.DEFAULT_ORDER
    tol: float = 1e-10
    q: int | None = None
    r: int | None = None
    a: int | None = None
    k: int | None = None
    s: tuple | None = None
    t_max: int | None = None
    q_max: int = 30
    delta: int | None = None
    R: int | None = None
    period: tuple | None = None
    grid: list | None = None
    length: int | None = None
    radicand: int | None = None
    out: str | None = None
    fmt: str = 'csv'
    seed: int = 0
    workers: int = 1
    max_ball: int = semigroup.DEFAULT_MAX_BALL
    max_sl2_ball: int = analytic_sums.DEFAULT_MAX_BALL
    max_pairs: int = analytic_sums.DEFAULT_MAX_PAIRS
    max_triples: int = distribution.DEFAULT_MAX_TRIPLES
    progress_every: int | None = None
    samples: int = 20

    def validate(self):
        """Check every parameter before dispatch"""
        if self.command not in COMMANDS:
            raise ValidationError(f"Unknown command '{self.command}' (expected one of {sorted(COMMANDS)})")
        required, _ = COMMANDS[self.command]
        missing = [name for name in required if getattr(self, name) is None]
        if missing:
            raise ValidationError(f"Command '{self.command}' needs {', '.join(missing)}")
        if self.fmt not in ('csv', 'json', 'xlsx'):
            raise ValidationError(f"Unknown format '{self.fmt}'")
        if self.workers < 1:
            raise ValidationError(f"workers must be >= 1, got {self.workers}")
        if self.alpha_grid is not None and not all(0 < a < 1 for a in self.alpha_grid):
            raise ValidationError(f"alpha grid must lie in (0, 1): {self.alpha_grid}")
        if self.command == 'sequence' and self.N is not None:
            product = self.X * self.Y * self.Z
            if not math.isclose(product, self.N, rel_tol=XYZ_TOLERANCE):
                raise ValidationError(f"X*Y*Z = {product} does not match N = {self.N}")
        return self

    @property
    def tag(self):
        return COMMANDS[self.command][1]

    def parameters(self):
        """Non-empty parameters for the output header"""
        values = asdict(self)
        values['alphabet'] = list(self.alphabet.letters) if self.alphabet else None
        return {k: v for k, v in values.items() if v not in (None, {}, []) and k not in ('out', 'fmt')}

    def enumerator(self):
        return semigroup.BallEnumerator(
            {'max_ball': self.max_ball, 'workers': self.workers, 'progress_every': self.progress_every}
        )

    def estimator(self):
        return dimension.DimensionEstimator({'order': self.order, 'tol': self.tol})

    def sl2_sums(self):
        return analytic_sums.SL2Sums(
            {'max_ball': self.max_sl2_ball, 'max_pairs': self.max_pairs, 'expsum_samples': self.samples}
        )


# ==================== MULTIPLICITY RATIOS ====================
def run_multiplicity_ratios(alphabet=None, t_max=1000, workers=1, delta=None, max_count=semigroup.DEFAULT_MAX_BALL):
    """Columns t, multiplicity, ratio M(t) / t^(2 delta - 1) for 2 <= t <= t_max"""
    alphabet = alphabet or Alphabet.range(10)
    if delta is None:
        delta = dimension.estimate_dimension(alphabet.letters, check_doubling=False).delta
    stats = semigroup.trace_multiplicities(alphabet, None, max_trace=t_max, max_count=max_count, workers=workers)
    t = np.arange(2, t_max + 1)
    counts = np.array([stats.multiplicity(int(v)) for v in t])
    table = pd.DataFrame({
        't': t,
        'multiplicity': counts,
        'ratio': counts / t.astype(float) ** (2 * delta - 1),
    })
    missing = table.loc[table['multiplicity'] == 0, 't'].tolist()
    logger.info(f"Multiplicity ratios for Gamma_{alphabet}: delta={delta:.6f}, unrepresented traces {missing[-5:]}")
    return table


run_figure3 = run_multiplicity_ratios


# ==================== DISPATCH ====================
def _ball(cfg):
    rows = [
        {'a': M.a, 'b': M.b, 'c': M.c, 'd': M.d, 'trace': M.trace, 'norm': M.norm}
        for M in cfg.enumerator().enumerate(cfg.alphabet, cfg.N)
    ]
    return pd.DataFrame(rows, columns=['a', 'b', 'c', 'd', 'trace', 'norm'])


def _traces(cfg):
    return cfg.enumerator().trace_multiplicities(cfg.alphabet, cfg.N).to_frame()


def _ratios(cfg):
    return run_multiplicity_ratios(cfg.alphabet, cfg.t_max, cfg.workers, max_count=cfg.max_ball)


def _dimension(cfg):
    return cfg.estimator().estimate(cfg.alphabet.letters).to_dict()


def _beta(cfg):
    value = local_densities.beta(cfg.q)
    return {'q': cfg.q, 'beta': f"{value.numerator}/{value.denominator}", 'beta_float': float(value)}


def _level(cfg):
    report = distribution.level_sweep(cfg.alphabet, cfg.N, cfg.alpha_grid, max_count=cfg.max_ball, workers=cfg.workers)
    return report.table


def _aleph(cfg):
    aleph = distribution.construct_aleph(cfg.Y, cfg.B)
    moduli = [q for q in (2, 3, 5, 6, 7) if core_arith.is_squarefree(q)]
    aleph.measure(moduli)
    table = pd.DataFrame([{'a': M.a, 'b': M.b, 'c': M.c, 'd': M.d, 'norm': M.norm} for M in aleph.elements])
    for q, value in aleph.discrepancies.items():
        table[f'discrepancy_mod_{q}'] = float(value)
    return table


def _sequence_inputs(cfg):
    aleph = distribution.construct_aleph(cfg.Y, cfg.B)
    return distribution.build_sequence_aN(cfg.alphabet, cfg.X, cfg.Y, cfg.Z, aleph, cfg.max_triples)


def _sequence(cfg):
    return _sequence_inputs(cfg).to_frame()


def _e1(cfg):
    return distribution.error_sum_E1(cfg.alphabet, cfg.Q, Mat2.identity(), cfg.X, cfg.Z, max_triples=cfg.max_triples).to_dict()


def _expsum(cfg):
    return cfg.sl2_sums().exp_sum(cfg.X, cfg.q, cfg.s).to_dict()


def _regime(cfg):
    return cfg.sl2_sums().regime(cfg.grid, seed=cfg.seed)


def _gauss(cfg):
    value = analytic_sums.gauss_sum_Sr(cfg.r, cfg.a, cfg.k)
    return {'r': cfg.r, 'a': cfg.a, 'k': cfg.k, 'real': value.real, 'imag': value.imag, 'abs': abs(value)}


def _energy(cfg):
    table, slope = cfg.sl2_sums().energy_growth(cfg.grid)
    logger.info(f"Energy exponent over X={cfg.grid}: {slope:.4f}")
    return table


def _geodesic(cfg):
    return {'period': list(cfg.period), 'height': geodesics.geodesic_height(cfg.period)}


def _discriminants(cfg):
    return geodesics.discriminant_set(cfg.alphabet, cfg.N, cfg.R, max_count=cfg.max_ball).table


def _pell(cfg):
    found = geodesics.pell_trace_search(cfg.alphabet, cfg.delta, cfg.N, max_count=cfg.max_ball)
    return pd.DataFrame(
        [{'t': p.t, 's': p.s, 'witnesses': len(p.witnesses), 'first_witness': str(p.witnesses[0])} for p in found],
        columns=['t', 's', 'witnesses', 'first_witness'],
    )


def _exceptions(cfg):
    exceptions = cfg.enumerator().local_global_exceptions(cfg.alphabet, cfg.t_max, cfg.q_max)
    return pd.DataFrame({'t': exceptions})


def _chaos(cfg):
    return geodesics.arithmetic_chaos_census(cfg.alphabet, cfg.length, cfg.radicand)


DISPATCH = {
    'ball': _ball,
    'traces': _traces,
    'figure3': _ratios,
    'ratios': _ratios,
    'dimension': _dimension,
    'beta': _beta,
    'level': _level,
    'aleph': _aleph,
    'sequence': _sequence,
    'e1': _e1,
    'expsum': _expsum,
    'regime': _regime,
    'gauss': _gauss,
    'energy': _energy,
    'geodesic': _geodesic,
    'discriminants': _discriminants,
    'pell': _pell,
    'exceptions': _exceptions,
    'chaos': _chaos,
}


def run_experiment(cfg, writer=None, manifest_file=None):
    """Validate, dispatch and write one experiment; returns (result, output path)"""
    cfg.validate()
    writer = writer or ReportWriter({})
    logger.info("=" * 80)
    logger.info(f"Running '{cfg.command}': {cfg.tag}")
    logger.info("=" * 80)

    started = time.perf_counter()
    result = DISPATCH[cfg.command](cfg)
    header = writer.header(cfg.command, cfg.tag, cfg.parameters(), cfg.seed)

    output = None
    if cfg.out:
        if isinstance(result, pd.DataFrame):
            output = writer.write_table(result, cfg.out, header, cfg.fmt)
        else:
            output = writer.write_json(result, cfg.out, header)
    if manifest_file is not None:
        writer.write_manifest(manifest_file, cfg.parameters(), time.perf_counter() - started)

    logger.info(f"✅ '{cfg.command}' finished in {time.perf_counter() - started:.2f}s")
    return result, output
