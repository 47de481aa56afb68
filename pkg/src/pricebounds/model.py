"""Linear demand model, total revenue, and the shared domain types.

The demand for item j at price vector p is

    d_j(p) = theta[0, j] + sum_l theta[l, j] * p[l-1]

i.e. coefficients are stored as an (m+1) x m matrix with one column per item:
row 0 holds the intercepts and row l (1-based) holds the effect of item l's
price on each item's demand.  Demand is deliberately not clamped at zero; the
model is linear and the downstream box-constrained quadratic optimization
relies on that structure.

Item indices are 0-based throughout the package.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolationError, InfeasibleBoxError

__all__ = [
    "CoeffMatrix",
    "PriceDemandDataset",
    "PriceEnvelope",
    "PriceBox",
    "as_price_vector",
    "eval_demand",
    "eval_demand_all",
    "eval_revenue",
    "quadratic_coeffs",
]


def _as_float_array(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ContractViolationError(f"{name} must be finite")
    return arr


def as_price_vector(values, m: int | None = None) -> np.ndarray:
    """Validate a price vector: 1-D, finite, optionally of length m."""
    p = _as_float_array(values, "price vector")
    if p.ndim != 1:
        raise ContractViolationError("price vector must be 1-D")
    if m is not None and p.shape[0] != m:
        raise ContractViolationError(f"price vector must have length {m}, got {p.shape[0]}")
    return p


@dataclass(frozen=True)
class CoeffMatrix:
    """Demand-model coefficients, shape (m+1, m), one column per item."""

    entries: np.ndarray

    def __post_init__(self):
        entries = _as_float_array(self.entries, "coefficient matrix")
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1] + 1:
            raise ContractViolationError(
                f"coefficient matrix must be (m+1) x m, got {entries.shape}"
            )
        object.__setattr__(self, "entries", entries)

    @property
    def m(self) -> int:
        return self.entries.shape[1]

    @property
    def intercepts(self) -> np.ndarray:
        return self.entries[0]

    @property
    def price_effects(self) -> np.ndarray:
        """Row l-1 is the effect of item l's price; shape (m, m)."""
        return self.entries[1:]


@dataclass(frozen=True)
class PriceDemandDataset:
    """n paired (price vector, demand vector) observations, both (n, m)."""

    prices: np.ndarray
    demands: np.ndarray

    def __post_init__(self):
        prices = _as_float_array(self.prices, "prices")
        demands = _as_float_array(self.demands, "demands")
        if prices.ndim != 2 or demands.shape != prices.shape:
            raise ContractViolationError(
                f"prices and demands must be equal-shape (n, m) matrices, "
                f"got {prices.shape} and {demands.shape}"
            )
        if prices.shape[0] < 1:
            raise ContractViolationError("dataset must contain at least one instance")
        object.__setattr__(self, "prices", prices)
        object.__setattr__(self, "demands", demands)

    @property
    def n(self) -> int:
        return self.prices.shape[0]

    @property
    def m(self) -> int:
        return self.prices.shape[1]

    def subset(self, indices) -> "PriceDemandDataset":
        idx = np.asarray(indices, dtype=int)
        return PriceDemandDataset(self.prices[idx], self.demands[idx])


@dataclass(frozen=True)
class PriceEnvelope:
    """Hard feasibility limits (pmin, pmax) that any admissible price obeys."""

    pmin: np.ndarray
    pmax: np.ndarray

    def __post_init__(self):
        pmin = as_price_vector(self.pmin)
        pmax = as_price_vector(self.pmax, m=pmin.shape[0])
        if np.any(pmin > pmax):
            raise InfeasibleBoxError("envelope requires pmin <= pmax elementwise")
        object.__setattr__(self, "pmin", pmin)
        object.__setattr__(self, "pmax", pmax)

    @classmethod
    def uniform(cls, m: int, pmin: float = 0.5, pmax: float = 1.1) -> "PriceEnvelope":
        return cls(np.full(m, float(pmin)), np.full(m, float(pmax)))

    @property
    def m(self) -> int:
        return self.pmin.shape[0]


@dataclass(frozen=True)
class PriceBox:
    """Per-item price bounds [alpha, beta] inside an envelope [pmin, pmax].

    The ordering pmin <= alpha <= beta <= pmax is enforced at construction;
    the bounds-estimation modules repair candidate bounds before building one.
    """

    alpha: np.ndarray
    beta: np.ndarray
    pmin: np.ndarray
    pmax: np.ndarray

    def __post_init__(self):
        alpha = as_price_vector(self.alpha)
        m = alpha.shape[0]
        beta = as_price_vector(self.beta, m=m)
        pmin = as_price_vector(self.pmin, m=m)
        pmax = as_price_vector(self.pmax, m=m)
        if np.any(alpha > beta):
            raise InfeasibleBoxError("price box requires alpha <= beta elementwise")
        if np.any(pmin > alpha) or np.any(beta > pmax):
            raise ContractViolationError("price box must lie inside its envelope")
        for name, arr in (("alpha", alpha), ("beta", beta), ("pmin", pmin), ("pmax", pmax)):
            object.__setattr__(self, name, arr)

    @classmethod
    def full(cls, env: PriceEnvelope) -> "PriceBox":
        return cls(env.pmin, env.pmax, env.pmin, env.pmax)

    @property
    def m(self) -> int:
        return self.alpha.shape[0]

    @property
    def envelope(self) -> PriceEnvelope:
        return PriceEnvelope(self.pmin, self.pmax)

    @property
    def widths(self) -> np.ndarray:
        return self.beta - self.alpha


def eval_demand(theta: CoeffMatrix, p, item: int) -> float:
    """Demand of one item at prices p (0-based item index, no clamping)."""
    pv = as_price_vector(p, m=theta.m)
    if not 0 <= item < theta.m:
        raise ContractViolationError(f"item index {item} out of range [0, {theta.m})")
    col = theta.entries[:, item]
    return float(col[0] + col[1:] @ pv)


def eval_demand_all(theta: CoeffMatrix, p) -> np.ndarray:
    """Demand of every item at prices p, shape (m,)."""
    pv = as_price_vector(p, m=theta.m)
    return theta.intercepts + pv @ theta.price_effects


def eval_revenue(theta: CoeffMatrix, p) -> float:
    """Total revenue sum_j d_j(p) * p_j."""
    pv = as_price_vector(p, m=theta.m)
    return float(eval_demand_all(theta, pv) @ pv)


def quadratic_coeffs(theta: CoeffMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Canonical quadratic form of the revenue: f(p) = p'Ap + b'p.

    A is the symmetrized price-effect block, b the intercepts; the identity
    eval_revenue(theta, p) == p'Ap + b'p holds for every p.
    """
    effects = theta.price_effects
    A = 0.5 * (effects + effects.T)
    b = theta.intercepts.copy()
    return A, b
