"""
Main Orchestrator Script
Command-line runner for the thin-traces experiments
"""
import argparse
import logging
import sys

import config
from modules.errors import BudgetExceededError, ValidationError
from modules.experiment_runner import COMMANDS, ExperimentConfig, run_experiment
from modules.report_writer import ReportWriter
from modules.result_validator import ResultValidator
from modules.semigroup import Alphabet

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_VALIDATION = 2
EXIT_BUDGET = 3


def setup_logging():
    """Setup logging configuration"""
    logging.basicConfig(
        level=getattr(logging, config.LOGGING_CONFIG['level']),
        format=config.LOGGING_CONFIG['format'],
        datefmt=config.LOGGING_CONFIG['date_format'],
        handlers=[
            logging.FileHandler(config.FILES['log_file'], encoding='utf-8'),
            logging.StreamHandler(sys.stdout)
        ]
    )
    return logging.getLogger(__name__)


def _ints(text):
    return tuple(int(v) for v in text.split(','))


def _floats(text):
    return [float(v) for v in text.split(',')]


def _alpha_grid(text):
    """'0.05:0.50:0.05' or a comma list"""
    if ':' in text:
        start, stop, step = (float(v) for v in text.split(':'))
        count = int(round((stop - start) / step)) + 1
        return [round(start + i * step, 10) for i in range(count)]
    return _floats(text)


def run_verification(logger):
    """Run the verification suite"""
    logger.info("\n" + "🔹" * 40)
    logger.info("VERIFICATION SUITE")
    logger.info("🔹" * 40 + "\n")

    try:
        validator = ResultValidator(config.VALIDATION_CONFIG)
        results = validator.validate_results(report_files=config.FILES)
        logger.info(f"✅ Verification complete: {len(results)} checks performed")
        return validator.passed

    except Exception as e:
        logger.error(f"❌ Verification failed: {e}", exc_info=True)
        return False


def run_command(logger, args):
    """Build the experiment config from CLI arguments and run it"""
    logger.info("\n" + "=" * 80)
    logger.info(f"🚀 STARTING: {args.command}")
    logger.info("=" * 80 + "\n")

    cfg = ExperimentConfig(
        command=args.command,
        alphabet=Alphabet.parse(args.alphabet) if args.alphabet else None,
        N=args.bound,
        X=args.X,
        Y=args.Y,
        Z=args.Z,
        Q=args.Q,
        Q0=args.Q0,
        alpha_grid=_alpha_grid(args.alpha) if args.alpha else None,
        B=args.B,
        order=args.order,
        tol=args.tol,
        q=args.q,
        r=args.r,
        a=args.a,
        k=args.k,
        s=_ints(args.s) if args.s else None,
        t_max=args.t_max,
        q_max=args.q_max,
        delta=args.delta,
        R=args.almost_prime,
        period=_ints(args.period) if args.period else None,
        grid=_floats(args.grid) if args.grid else None,
        length=args.length,
        radicand=args.field,
        out=str(config.TABLES_DIR / args.out) if args.out else None,
        fmt=args.format,
        seed=args.seed,
        workers=args.threads,
        max_ball=config.SEMIGROUP_CONFIG['max_ball'],
        max_sl2_ball=config.ANALYTIC_CONFIG['max_ball'],
        max_pairs=config.ANALYTIC_CONFIG['max_pairs'],
        max_triples=config.DISTRIBUTION_CONFIG['max_triples'],
        progress_every=config.SEMIGROUP_CONFIG['progress_every'],
        samples=config.ANALYTIC_CONFIG['expsum_samples'],
    )
    if cfg.command == 'expsum' and cfg.X is None:
        cfg.X = args.bound
    if cfg.command == 'energy' and cfg.grid is None:
        cfg.grid = [args.bound] if args.bound else config.ANALYTIC_CONFIG['energy_grid']
    if cfg.command == 'regime' and cfg.grid is None:
        cfg.grid = config.ANALYTIC_CONFIG['expsum_grid']
    if cfg.command == 'level' and cfg.alpha_grid is None:
        cfg.alpha_grid = config.DISTRIBUTION_CONFIG['alpha_grid']
    if cfg.command == 'discriminants' and cfg.R is None:
        cfg.R = config.GEODESIC_CONFIG['almost_prime_R']

    writer = ReportWriter(config.EXPERIMENT_CONFIG)
    result, output = run_experiment(cfg, writer, manifest_file=config.FILES['manifest'] if args.out else None)
    if output is None:
        print(result.to_string(index=False) if hasattr(result, 'to_string') else result)
    else:
        logger.info(f"📁 Output: {output}")
    return True


def build_parser():
    parser = argparse.ArgumentParser(
        description="Thin continued-fraction semigroups: traces, densities, sums and geodesics",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  python main.py traces --alphabet 1-10 --bound 1000 --out traces.csv
  python main.py figure3 --alphabet 1-10 --t-max 1000 --threads 4
  python main.py regime --grid 20,40,80 --seed 1
  python main.py dimension --alphabet 1,2 --order 32 --tol 1e-10
  python main.py beta --q 15
  python main.py level --alphabet 1-10 --bound 400 --alpha 0.05:0.50:0.05 --out report.csv
  python main.py e1 --alphabet 1,2 --Q 8 --X 6 --Z 6
  python main.py energy --grid 10,14,20,28 --format xlsx --out energy.xlsx
  python main.py geodesic --period 2,2,4,2,1,3,2,62,2,5,5,1,9,1,1,1
  python main.py verify                  Run the verification suite
  python main.py config                  Show the effective configuration
        """
    )

    parser.add_argument('command', choices=sorted(COMMANDS) + ['verify', 'config'], help='Experiment to run')
    parser.add_argument('--alphabet', help="Partial quotients, e.g. '1,2' or '1-10'")
    parser.add_argument('--bound', type=float, help='Norm bound N (or X for expsum)')
    parser.add_argument('--X', type=float)
    parser.add_argument('--Y', type=float)
    parser.add_argument('--Z', type=float)
    parser.add_argument('--Q', type=float)
    parser.add_argument('--Q0', type=float)
    parser.add_argument('--alpha', help="Exponent grid 'start:stop:step' or comma list")
    parser.add_argument('--B', type=int, default=config.DISTRIBUTION_CONFIG['aleph_modulus'], help='Aleph modulus')
    parser.add_argument('--order', type=int, default=config.DIMENSION_CONFIG['order'])
    parser.add_argument('--tol', type=float, default=config.DIMENSION_CONFIG['tol'])
    parser.add_argument('--q', type=int)
    parser.add_argument('--r', type=int)
    parser.add_argument('--a', type=int)
    parser.add_argument('--k', type=int)
    parser.add_argument('--s', help='Primitive 4-vector a,b,c,d')
    parser.add_argument('--t-max', dest='t_max', type=int)
    parser.add_argument('--q-max', dest='q_max', type=int, default=config.SEMIGROUP_CONFIG['admissibility_q_max'])
    parser.add_argument('--delta', type=int, help='Pell discriminant')
    parser.add_argument('--almost-prime', dest='almost_prime', type=int)
    parser.add_argument('--period', help='Partial quotients of a period')
    parser.add_argument('--grid', help='Comma list of X values')
    parser.add_argument('--length', type=int, default=config.GEODESIC_CONFIG['chaos_length'])
    parser.add_argument('--field', type=int, help='Radicand of the real quadratic field')
    parser.add_argument('--out', help='Output path, relative paths land under output/tables')
    parser.add_argument('--format', choices=['csv', 'json', 'xlsx'], default=config.EXPERIMENT_CONFIG['format'])
    parser.add_argument('--threads', type=int, default=config.SEMIGROUP_CONFIG['workers'])
    parser.add_argument('--seed', type=int, default=config.EXPERIMENT_CONFIG['seed'])
    return parser


def main(argv=None):
    """Main entry point"""
    args = build_parser().parse_args(argv)

    if args.command == 'config':
        config.display_config()
        sys.exit(EXIT_OK)

    # Setup logging
    logger = setup_logging()

    try:
        # Validate configuration
        config.validate_config()

        if args.command == 'verify':
            sys.exit(EXIT_OK if run_verification(logger) else EXIT_FAILURE)

        run_command(logger, args)
        logger.info("\n✅ Command completed successfully!")
        sys.exit(EXIT_OK)

    except ValidationError as e:
        logger.error(f"\n❌ Invalid input: {e}")
        sys.exit(EXIT_VALIDATION)

    except BudgetExceededError as e:
        logger.error(f"\n❌ Budget guard: {e}")
        sys.exit(EXIT_BUDGET)

    except Exception as e:
        logger.error(f"\n❌ Command failed with error: {e}", exc_info=True)
        sys.exit(EXIT_FAILURE)


if __name__ == "__main__":
    main()
