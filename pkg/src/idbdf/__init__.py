"""ID-BDF convolution-quadrature stepping for stochastic fractional evolution
equations with integrated additive noise, plus the Monte Carlo rate harness."""

from .cq import BdfSymbol, WeightTable, bdf_symbol, frac_weights, symbol_error
from .experiment import (
    ConfigError,
    ConvergenceReport,
    ExperimentConfig,
    TruncationReport,
    deterministic_order_study,
    emit_report,
    emit_truncation,
    run_sweep,
    truncation_study,
)
from .mittag_leffler import MlQuery, MlResult, evaluate, ml
from .noise import (
    NoisePathSet,
    NoiseSpec,
    dump_paths,
    fold_noise,
    fold_trajectory,
    load_paths,
    mode_increments,
    sample_paths,
)
from .spectral import ModeField, eigenvalue, eigenvalues, l2_norm, project
from .stepper import (
    BDF3_ALPHA_STAR,
    ProblemSpec,
    SchemeSpec,
    reconstruct_u,
    rhs_initial,
    step_all,
)

__version__ = "0.1.0"

__all__ = [
    "BdfSymbol", "WeightTable", "bdf_symbol", "frac_weights", "symbol_error",
    "ModeField", "project", "l2_norm", "eigenvalue", "eigenvalues",
    "MlQuery", "MlResult", "ml", "evaluate",
    "NoiseSpec", "NoisePathSet", "sample_paths", "mode_increments",
    "fold_noise", "fold_trajectory", "dump_paths", "load_paths",
    "SchemeSpec", "ProblemSpec", "BDF3_ALPHA_STAR",
    "rhs_initial", "step_all", "reconstruct_u",
    "ExperimentConfig", "ConfigError", "ConvergenceReport", "TruncationReport",
    "run_sweep", "emit_report", "truncation_study", "emit_truncation",
    "deterministic_order_study",
    "__version__",
]
