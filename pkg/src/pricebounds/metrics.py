"""Trial evaluation metrics: relative revenue, average width, per-item R^2."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolationError, FlaggedTrialError
from .model import CoeffMatrix, PriceBox, PriceDemandDataset, eval_revenue
from .ols import design_matrix

__all__ = ["TrialMetrics", "relative_revenue", "average_width", "per_item_r2"]


@dataclass(frozen=True)
class TrialMetrics:
    relative_revenue: float
    average_width: float
    per_item_r2: tuple[float, ...]
    wall_time_bounds_s: float
    wall_time_total_s: float


def relative_revenue(theta_star: CoeffMatrix, p_hat, p_star) -> float:
    """Ground-truth revenue at p_hat over ground-truth revenue at p_star.

    At most 1 (plus solver tolerance) whenever p_star is envelope-optimal and
    p_hat is feasible.  A nonpositive reference revenue makes the ratio
    meaningless; such trials raise FlaggedTrialError for the caller to log.
    """
    reference = eval_revenue(theta_star, p_star)
    if not reference > 0:
        raise FlaggedTrialError(f"reference revenue {reference} is not positive")
    return eval_revenue(theta_star, p_hat) / reference


def average_width(box: PriceBox) -> float:
    """Mean price-range width across items."""
    return float(np.mean(box.widths))


def per_item_r2(theta_hat: CoeffMatrix, data: PriceDemandDataset) -> np.ndarray:
    """In-sample R^2 of the fitted demand model, one value per item.

    Items with zero demand variance get NaN (no meaningful R^2) and are
    skipped by scatter emission downstream.
    """
    if data.n < 2:
        raise ContractViolationError("R^2 needs at least two instances")
    if data.m != theta_hat.m:
        raise ContractViolationError("dataset and coefficients disagree on item count")
    predicted = design_matrix(data.prices) @ theta_hat.entries
    sse = np.sum((data.demands - predicted) ** 2, axis=0)
    sst = np.sum((data.demands - data.demands.mean(axis=0)) ** 2, axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        r2 = np.where(sst > 0, 1.0 - sse / sst, np.nan)
    return r2
