"""
Configuration file for the thin-traces experiment runner
Budget caps, default orders and output locations
"""

import os
from pathlib import Path
from dotenv import load_dotenv

# Load environment variables
load_dotenv()

# Base directories
BASE_DIR = Path(__file__).parent
OUTPUT_DIR = BASE_DIR / 'output'
TABLES_DIR = OUTPUT_DIR / 'tables'
REPORTS_DIR = OUTPUT_DIR / 'reports'
LOGS_DIR = BASE_DIR / 'logs'

# Create directories if they don't exist
for directory in [OUTPUT_DIR, TABLES_DIR, REPORTS_DIR, LOGS_DIR]:
    directory.mkdir(parents=True, exist_ok=True)


def _env_int(name, default):
    return int(os.getenv(name, default))


def _env_float(name, default):
    return float(os.getenv(name, default))


# ==================== FILE PATHS ====================
FILES = {
    # Reports
    'validation_report': REPORTS_DIR / 'validation_report.html',
    'validation_summary': REPORTS_DIR / 'validation_summary.csv',
    'manifest': REPORTS_DIR / 'manifest.json',

    # Logs
    'log_file': LOGS_DIR / 'thin_traces.log',
}


# ==================== LOGGING CONFIGURATION ====================
LOGGING_CONFIG = {
    'level': os.getenv('THIN_LOG_LEVEL', 'INFO'),  # Options: DEBUG, INFO, WARNING, ERROR, CRITICAL
    'format': '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    'date_format': '%Y-%m-%d %H:%M:%S'
}


# ==================== SEMIGROUP CONFIGURATION ====================
SEMIGROUP_CONFIG = {
    'max_ball': _env_int('THIN_MAX_BALL', 10_000_000),
    'workers': _env_int('THIN_WORKERS', 1),
    'admissibility_q_max': 30,
    'progress_every': _env_int('THIN_PROGRESS_EVERY', 1_000_000),
}


# ==================== DIMENSION CONFIGURATION ====================
DIMENSION_CONFIG = {
    'order': _env_int('THIN_DIM_ORDER', 32),
    'tol': _env_float('THIN_DIM_TOL', 1e-10),
}


# ==================== DISTRIBUTION CONFIGURATION ====================
DISTRIBUTION_CONFIG = {
    'alpha_grid': [0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45, 0.50],
    'aleph_modulus': 2,
    'max_triples': _env_int('THIN_MAX_TRIPLES', 50_000_000),
}


# ==================== ANALYTIC SUMS CONFIGURATION ====================
ANALYTIC_CONFIG = {
    'max_ball': _env_int('THIN_MAX_SL2_BALL', 32_000_000),
    'max_pairs': _env_int('THIN_MAX_PAIRS', 2_000_000_000),
    'energy_grid': [10, 20, 40, 80],
    'expsum_grid': [20, 40, 80],
    'expsum_samples': 20,
}


# ==================== GEODESIC CONFIGURATION ====================
GEODESIC_CONFIG = {
    'almost_prime_R': 2,
    'chaos_length': 6,
}


# ==================== EXPERIMENT CONFIGURATION ====================
EXPERIMENT_CONFIG = {
    'seed': _env_int('THIN_SEED', 0),
    'format': 'csv',
    'float_digits': 12,
}


# ==================== VERIFICATION CONFIGURATION ====================
VALIDATION_CONFIG = {
    'oracle_primes': [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31],
    'rho_prime_limit': 1000,
    'gauss_prime_limit': 97,
    'closure_moduli': [2, 3, 5, 6, 7],
    'dimension_target': 0.9257,
    'dimension_tolerance': 1e-3,
}


# ==================== VALIDATION FUNCTION ====================
def validate_config():
    """
    Validate configuration settings
    Raises ValueError listing every problem found
    """
    errors = []

    if SEMIGROUP_CONFIG['max_ball'] < 1:
        errors.append("THIN_MAX_BALL must be positive")
    if SEMIGROUP_CONFIG['workers'] < 1:
        errors.append("THIN_WORKERS must be >= 1")
    if DIMENSION_CONFIG['order'] < 8:
        errors.append("THIN_DIM_ORDER must be >= 8")
    if DIMENSION_CONFIG['tol'] < 1e-12:
        errors.append("THIN_DIM_TOL must be >= 1e-12")
    if LOGGING_CONFIG['level'] not in ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'):
        errors.append(f"THIN_LOG_LEVEL '{LOGGING_CONFIG['level']}' is not a logging level")
    if not all(0 < a < 1 for a in DISTRIBUTION_CONFIG['alpha_grid']):
        errors.append("alpha_grid entries must lie in (0, 1)")

    # Check directories exist
    for directory in [OUTPUT_DIR, TABLES_DIR, REPORTS_DIR, LOGS_DIR]:
        if not directory.exists():
            errors.append(f"Directory does not exist: {directory}")

    if errors:
        error_msg = "\n❌ Configuration Errors:\n" + "\n".join(f"   • {e}" for e in errors)
        raise ValueError(error_msg)

    return True


# ==================== DISPLAY CONFIGURATION ====================
def display_config():
    """Display current configuration (for debugging)"""
    print("\n" + "="*70)
    print("CONFIGURATION SUMMARY")
    print("="*70)

    print("\n📁 Directories:")
    print(f"   Base: {BASE_DIR}")
    print(f"   Output: {OUTPUT_DIR}")
    print(f"   Tables: {TABLES_DIR}")
    print(f"   Reports: {REPORTS_DIR}")
    print(f"   Logs: {LOGS_DIR}")

    print("\n🔧 Budgets:")
    print(f"   Max ball: {SEMIGROUP_CONFIG['max_ball']:,}")
    print(f"   Workers: {SEMIGROUP_CONFIG['workers']}")
    print(f"   Max SL2 ball: {ANALYTIC_CONFIG['max_ball']:,}")
    print(f"   Max energy pairs: {ANALYTIC_CONFIG['max_pairs']:,}")
    print(f"   Max triples: {DISTRIBUTION_CONFIG['max_triples']:,}")

    print("\n📐 Numerics:")
    print(f"   Collocation order: {DIMENSION_CONFIG['order']}")
    print(f"   Dimension tolerance: {DIMENSION_CONFIG['tol']}")
    print(f"   Aleph modulus: {DISTRIBUTION_CONFIG['aleph_modulus']}")
    print(f"   Seed: {EXPERIMENT_CONFIG['seed']}")

    print("\n📊 Output Files:")
    for key, path in FILES.items():
        status = "✓" if path.exists() else "○"
        print(f"   {status} {key}: {path.name}")

    print("\n🔧 Logging:")
    print(f"   Level: {LOGGING_CONFIG['level']}")
    print(f"   Log File: {FILES['log_file']}")

    print("\n" + "="*70 + "\n")


# ==================== EXPORT CONFIG ====================
__all__ = [
    'FILES',
    'LOGGING_CONFIG',
    'SEMIGROUP_CONFIG',
    'DIMENSION_CONFIG',
    'DISTRIBUTION_CONFIG',
    'ANALYTIC_CONFIG',
    'GEODESIC_CONFIG',
    'EXPERIMENT_CONFIG',
    'VALIDATION_CONFIG',
    'BASE_DIR',
    'OUTPUT_DIR',
    'TABLES_DIR',
    'REPORTS_DIR',
    'LOGS_DIR',
    'validate_config',
    'display_config',
]


# Run validation on import (optional - comment out if not desired)
if __name__ != "__main__":
    try:
        validate_config()
    except ValueError as e:
        print(e)
        print("\n⚠️  Please fix the configuration errors above")
