"""Bootstrap estimation of profitable price bounds.

Resample the historical dataset with replacement, refit the demand model on
each resample, solve the full-envelope pricing problem, and set per-item
bounds to the sample mean of the optimal prices plus/minus kappa sample
standard deviations, clipped to the envelope.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .boxqp import DEFAULT_QP, QpSolverConfig, pgd_maximize_quadratic
from .errors import ContractViolationError
from .model import PriceBox, PriceDemandDataset, PriceEnvelope, quadratic_coeffs
from .ols import fit_ols
from .seeds import derive_seed, substream

__all__ = ["BootstrapConfig", "bootstrap_bounds", "kappa_for_confidence", "CONFIDENCE_KAPPA"]

# Two-sided standard-normal critical values per nominal coverage; 100%
# coverage means the full feasibility envelope.
CONFIDENCE_KAPPA = {
    0.60: 0.841,
    0.65: 0.935,
    0.70: 1.036,
    0.75: 1.150,
    0.80: 1.282,
    0.85: 1.440,
    0.90: 1.645,
    0.95: 1.960,
    0.99: 2.576,
    1.00: math.inf,
}


def kappa_for_confidence(level: float) -> float:
    """Critical-value multiplier for a nominal two-sided coverage level."""
    key = round(float(level), 2)
    try:
        return CONFIDENCE_KAPPA[key]
    except KeyError:
        raise ContractViolationError(
            f"no kappa tabulated for confidence level {level!r}; "
            f"known levels: {sorted(CONFIDENCE_KAPPA)}"
        ) from None


@dataclass(frozen=True)
class BootstrapConfig:
    n_bootstrap: int = 100
    kappa: float = 1.645

    def __post_init__(self):
        if self.n_bootstrap < 2:
            raise ContractViolationError(
                "n_bootstrap must be >= 2 (sample standard deviation needs it)"
            )
        if not self.kappa >= 0:
            raise ContractViolationError("kappa must be nonnegative")


def bootstrap_bounds(
    data: PriceDemandDataset,
    env: PriceEnvelope,
    cfg: BootstrapConfig = BootstrapConfig(),
    qp: QpSolverConfig = DEFAULT_QP,
    seed: int = 0,
) -> PriceBox:
    """Price bounds from the bootstrap distribution of optimal prices.

    Each replicate draws n instances with replacement, refits by OLS (falling
    back to the minimum-norm solution on degenerate resamples), and maximizes
    the fitted revenue over the full envelope.  Replicates use independent
    streams derived from the seed, so results do not depend on execution
    order.  kappa = inf returns the envelope itself.
    """
    if data.n < 2:
        raise ContractViolationError("bootstrap needs at least two instances")
    if data.m != env.m:
        raise ContractViolationError("dataset and envelope disagree on item count")

    if math.isinf(cfg.kappa):
        return PriceBox.full(env)

    n = data.n
    optima = np.empty((cfg.n_bootstrap, data.m))
    for b in range(cfg.n_bootstrap):
        rng = substream(seed, "bootstrap-resample", b)
        idx = rng.integers(0, n, size=n)
        theta_b = fit_ols(data.subset(idx))
        A, lin = quadratic_coeffs(theta_b)
        optima[b] = pgd_maximize_quadratic(
            A, lin, env.pmin, env.pmax, qp, seed=derive_seed(seed, "bootstrap-qp", b)
        )

    mean = optima.mean(axis=0)
    sd = optima.std(axis=0, ddof=1)
    alpha = np.maximum(env.pmin, mean - cfg.kappa * sd)
    beta = np.minimum(env.pmax, mean + cfg.kappa * sd)
    return PriceBox(alpha, beta, env.pmin, env.pmax)
