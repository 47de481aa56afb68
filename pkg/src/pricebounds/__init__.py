"""Profitable price-bound estimation for prescriptive price optimization.

Two estimation methods — bootstrap confidence intervals over optimal prices
and cross-validation-guided black-box search — plus a quantile baseline, a
synthetic-data evaluation harness, and an HTTP service wrapping the core
operations.
"""

__version__ = "0.1.0"

from .bootstrap import BootstrapConfig, bootstrap_bounds, kappa_for_confidence
from .boxqp import QpSolverConfig, grid_oracle, maximize_revenue_boxed
from .crossval import (
    CvConfig,
    CvRevenueEstimator,
    QuantileConfig,
    cv_bounds_search,
    cv_penalized_objective,
    cv_revenue_estimate,
    quantile_bounds,
)
from .errors import ContractViolationError, FlaggedTrialError, InfeasibleBoxError
from .metrics import TrialMetrics, average_width, per_item_r2, relative_revenue
from .model import (
    CoeffMatrix,
    PriceBox,
    PriceDemandDataset,
    PriceEnvelope,
    eval_demand,
    eval_demand_all,
    eval_revenue,
    quadratic_coeffs,
)
from .neldermead import NmConfig, nm_maximize
from .ols import fit_ols
from .synthetic import (
    SyntheticSpec,
    calibrate_noise_sigma,
    generate_dataset,
    oracle_optimal_prices,
    realized_noise_level,
    sample_ground_truth,
)

__all__ = [
    "__version__",
    "BootstrapConfig",
    "CoeffMatrix",
    "ContractViolationError",
    "CvConfig",
    "CvRevenueEstimator",
    "FlaggedTrialError",
    "InfeasibleBoxError",
    "NmConfig",
    "PriceBox",
    "PriceDemandDataset",
    "PriceEnvelope",
    "QpSolverConfig",
    "QuantileConfig",
    "SyntheticSpec",
    "TrialMetrics",
    "average_width",
    "bootstrap_bounds",
    "calibrate_noise_sigma",
    "cv_bounds_search",
    "cv_penalized_objective",
    "cv_revenue_estimate",
    "eval_demand",
    "eval_demand_all",
    "eval_revenue",
    "fit_ols",
    "generate_dataset",
    "grid_oracle",
    "kappa_for_confidence",
    "maximize_revenue_boxed",
    "nm_maximize",
    "oracle_optimal_prices",
    "per_item_r2",
    "quadratic_coeffs",
    "quantile_bounds",
    "realized_noise_level",
    "relative_revenue",
    "sample_ground_truth",
]
