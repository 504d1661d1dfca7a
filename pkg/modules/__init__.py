"""
Thin continued-fraction semigroup modules
"""

__version__ = "1.0.0"

from .errors import ThinTracesError, ValidationError, BudgetExceededError, ConvergenceError
from .semigroup import Alphabet, TraceStats
from .report_writer import ReportWriter
from .result_validator import ResultValidator
from .experiment_runner import ExperimentConfig, run_experiment

__all__ = [
    'ThinTracesError',
    'ValidationError',
    'BudgetExceededError',
    'ConvergenceError',
    'Alphabet',
    'TraceStats',
    'ReportWriter',
    'ResultValidator',
    'ExperimentConfig',
    'run_experiment'
]
