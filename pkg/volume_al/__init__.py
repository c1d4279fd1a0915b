from .classifier import RlscModel, error_rate, knn_predict, predict, train_rlsc
from .config import ExperimentConfig
from .dataset import Dataset, LabelOracle, gen_synthetic, load_csv, save_csv
from .errors import (
    BudgetExceeded,
    ConfigError,
    DomainError,
    IoError,
    MalformedInput,
    ShapeError,
    VolumeALError,
)
from .geometry import Ball, TheoremReport, meb, outlier_filter, run_theory_suite
from .kernel import KernelKind, KernelSpec, kernel_matrix, mmd_squared
from .report import emit_csv, emit_svg, load_curve_csv
from .represent import EmParams, em_representation, snap_to_data
from .runner import CurveRow, ErrorCurve, run_experiment
from .sparsify import SparsifyParams, SubsetIndices, sparsify_halve
from .strategies import SeedSet, StrategyConfig, StrategyName, make_strategy

__version__ = "0.1.0"

# __all__ defines the public API for the package.
# Each module also defines its own __all__.
__all__ = [
    "__version__",
    "Ball",
    "BudgetExceeded",
    "ConfigError",
    "CurveRow",
    "Dataset",
    "DomainError",
    "EmParams",
    "ErrorCurve",
    "ExperimentConfig",
    "IoError",
    "KernelKind",
    "KernelSpec",
    "LabelOracle",
    "MalformedInput",
    "RlscModel",
    "SeedSet",
    "ShapeError",
    "SparsifyParams",
    "StrategyConfig",
    "StrategyName",
    "SubsetIndices",
    "TheoremReport",
    "VolumeALError",
    "em_representation",
    "emit_csv",
    "emit_svg",
    "error_rate",
    "gen_synthetic",
    "kernel_matrix",
    "knn_predict",
    "load_csv",
    "load_curve_csv",
    "make_strategy",
    "meb",
    "mmd_squared",
    "outlier_filter",
    "predict",
    "run_experiment",
    "run_theory_suite",
    "save_csv",
    "snap_to_data",
    "sparsify_halve",
    "train_rlsc",
]
