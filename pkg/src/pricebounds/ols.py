"""Ordinary-least-squares fit of the demand coefficient matrix."""

from __future__ import annotations

import numpy as np

from .errors import ContractViolationError
from .model import CoeffMatrix, PriceDemandDataset

__all__ = ["fit_ols", "design_matrix"]


def design_matrix(prices: np.ndarray) -> np.ndarray:
    """Prepend the intercept column of ones: (n, m) prices -> (n, m+1)."""
    n = prices.shape[0]
    return np.hstack([np.ones((n, 1)), prices])


def fit_ols(data: PriceDemandDataset) -> CoeffMatrix:
    """Column-by-column least squares of demands on [1 | prices].

    One regression per item, all solved in a single lstsq call.  Rank-deficient
    designs (e.g. degenerate bootstrap resamples) fall back to the minimum-norm
    solution, so the fit is total: it never raises for collinear prices.
    """
    if not isinstance(data, PriceDemandDataset):
        raise ContractViolationError("fit_ols expects a PriceDemandDataset")
    X = design_matrix(data.prices)
    entries, _, _, _ = np.linalg.lstsq(X, data.demands, rcond=None)
    return CoeffMatrix(entries)
