"""Mixed-frequency regression toolkit.

High-frequency responses modeled from low-frequency predictors, with pooled
coefficient structures, a hierarchical (nested) group-lasso estimator, a HAR
benchmark, rolling-window direct forecasting and forecast-comparison
statistics (Diebold-Mariano, Model Confidence Set).
"""

from .data import (
    AlignedPanel,
    MFDataset,
    RawSeries,
    align_fixed_m,
    apply_tcode,
    assemble,
    monthly_period,
    read_hf_csv,
    read_lf_csv,
    simulate_pooled_rumidas,
)
from .design import (
    CenteringRecord,
    Column,
    Design,
    ModelKind,
    ModelSpec,
    build_design,
    build_har,
    build_pooled,
    build_pooled_dwm,
    build_rumidas_dummy,
    build_rumidas_eq,
    center_scale,
)
from .errors import DataError, NumericalError
from .evalstats import DMResult, MCSResult, dm_matrix, dm_test, mcs
from .forecast import (
    BacktestSpec,
    FitRecord,
    ForecastTable,
    ModelEntry,
    loss_summary,
    rolling_backtest,
    selection_frequency,
)
from .solver import (
    Block,
    FitResult,
    GroupStructure,
    HierarchicalGroupLasso,
    SolverConfig,
    bic_select,
    fit_hierarchical,
    fit_ols,
    fit_path,
    lambda_grid,
    make_groups,
    ols,
    penalty,
    post_lasso,
    prox_gradient_gap,
    prox_nested,
)

__version__ = "0.1.0"

__all__ = [
    "AlignedPanel",
    "BacktestSpec",
    "Block",
    "CenteringRecord",
    "Column",
    "DMResult",
    "DataError",
    "Design",
    "FitRecord",
    "FitResult",
    "ForecastTable",
    "GroupStructure",
    "HierarchicalGroupLasso",
    "MCSResult",
    "MFDataset",
    "ModelEntry",
    "ModelKind",
    "ModelSpec",
    "NumericalError",
    "RawSeries",
    "SolverConfig",
    "align_fixed_m",
    "apply_tcode",
    "assemble",
    "bic_select",
    "build_design",
    "build_har",
    "build_pooled",
    "build_pooled_dwm",
    "build_rumidas_dummy",
    "build_rumidas_eq",
    "center_scale",
    "dm_matrix",
    "dm_test",
    "fit_hierarchical",
    "fit_ols",
    "fit_path",
    "lambda_grid",
    "loss_summary",
    "make_groups",
    "mcs",
    "monthly_period",
    "ols",
    "penalty",
    "post_lasso",
    "prox_gradient_gap",
    "prox_nested",
    "read_hf_csv",
    "read_lf_csv",
    "rolling_backtest",
    "selection_frequency",
    "simulate_pooled_rumidas",
    "__version__",
]
