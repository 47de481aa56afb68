"""Cross-validation revenue estimation, the penalized bounds search, and the
quantile baseline.

The CV estimate of ground-truth revenue for a candidate box [alpha, beta]
fits per-fold training and validation models once, prices against each
training model inside the box, and averages the validation-model revenue at
those prices.  A Nelder-Mead search over the concatenated (alpha, beta)
vector maximizes that estimate minus quadratic one-sided penalties for the
total-width budget and for per-item bound-order violations; the envelope box
constraints are handled natively by the simplex method's clipping.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .boxqp import DEFAULT_QP, QpSolverConfig, pgd_maximize_quadratic
from .errors import ContractViolationError
from .model import PriceBox, PriceDemandDataset, PriceEnvelope, quadratic_coeffs
from .neldermead import NmConfig, nm_maximize
from .ols import fit_ols
from .seeds import derive_seed, substream

__all__ = [
    "CvConfig",
    "QuantileConfig",
    "make_folds",
    "CvRevenueEstimator",
    "cv_revenue_estimate",
    "cv_penalized_objective",
    "cv_bounds_search",
    "quantile_bounds",
    "hinge_sq",
]


@dataclass(frozen=True)
class CvConfig:
    gamma: float
    k_folds: int = 5
    lambda1: float = 1.0
    lambda2: float = 1.0
    nm: NmConfig = field(default_factory=NmConfig)
    qp: QpSolverConfig = field(default_factory=lambda: DEFAULT_QP)

    def __post_init__(self):
        if not self.gamma >= 0:
            raise ContractViolationError("gamma must be nonnegative")
        if self.k_folds < 2:
            raise ContractViolationError("k_folds must be at least 2")
        if not (self.lambda1 >= 0 and self.lambda2 >= 0):
            raise ContractViolationError("penalty parameters must be nonnegative")


@dataclass(frozen=True)
class QuantileConfig:
    q: float

    def __post_init__(self):
        if not 0.0 < self.q <= 1.0:
            raise ContractViolationError("q must lie in (0, 1]")


def hinge_sq(x: float) -> float:
    """One-sided quadratic penalty g(x) = max(x, 0)^2."""
    return max(float(x), 0.0) ** 2


def make_folds(n: int, k: int, seed: int) -> list[np.ndarray]:
    """Seeded partition of range(n) into k disjoint folds, sizes within 1."""
    if k > n:
        raise ContractViolationError(f"cannot split {n} instances into {k} folds")
    if k < 2:
        raise ContractViolationError("need at least 2 folds")
    perm = substream(seed, "cv-folds").permutation(n)
    return np.array_split(perm, k)


class CvRevenueEstimator:
    """Fold fits precomputed once; evaluate() prices many boxes cheaply.

    Fold assignment and the per-fold pricing seeds derive from (seed, fold
    index) only, so evaluate() is a fixed deterministic function throughout
    one bounds search, as the simplex method requires.
    """

    def __init__(self, data: PriceDemandDataset, cfg: CvConfig, seed: int = 0):
        folds = make_folds(data.n, cfg.k_folds, seed)
        everything = np.arange(data.n)
        self._qp = cfg.qp
        self._folds = []
        for k, vld_idx in enumerate(folds):
            trn_idx = np.setdiff1d(everything, vld_idx)
            A_trn, b_trn = quadratic_coeffs(fit_ols(data.subset(trn_idx)))
            A_vld, b_vld = quadratic_coeffs(fit_ols(data.subset(vld_idx)))
            self._folds.append(
                (A_trn, b_trn, np.linalg.eigvalsh(A_trn), A_vld, b_vld,
                 derive_seed(seed, "cv-qp", k))
            )

    @property
    def k_folds(self) -> int:
        return len(self._folds)

    def evaluate(self, alpha: np.ndarray, beta: np.ndarray) -> float:
        total = 0.0
        for A_trn, b_trn, eigs, A_vld, b_vld, qp_seed in self._folds:
            p = pgd_maximize_quadratic(A_trn, b_trn, alpha, beta, self._qp, qp_seed, eigs)
            total += p @ A_vld @ p + b_vld @ p
        return total / len(self._folds)


def cv_revenue_estimate(
    data: PriceDemandDataset,
    box: PriceBox,
    cfg: CvConfig,
    seed: int = 0,
) -> float:
    """K-fold cross-validation estimate of ground-truth revenue for a box."""
    return CvRevenueEstimator(data, cfg, seed).evaluate(box.alpha, box.beta)


def _penalized_value(estimator: CvRevenueEstimator, alphabeta: np.ndarray, cfg: CvConfig) -> float:
    m = alphabeta.shape[0] // 2
    alpha, beta = alphabeta[:m], alphabeta[m:]
    # Order violations are repaired (midpoint) for the inner pricing problem
    # only; both penalties see the unrepaired bounds so the search still
    # feels the violation.
    bad = alpha > beta
    if bad.any():
        mid = 0.5 * (alpha + beta)
        alpha_in = np.where(bad, mid, alpha)
        beta_in = np.where(bad, mid, beta)
    else:
        alpha_in, beta_in = alpha, beta
    value = estimator.evaluate(alpha_in, beta_in)
    value -= cfg.lambda1 * hinge_sq(np.sum(beta - alpha) - cfg.gamma)
    value -= cfg.lambda2 * float(np.sum(np.maximum(alpha - beta, 0.0) ** 2))
    return value if np.isfinite(value) else -np.inf


def cv_penalized_objective(
    data: PriceDemandDataset,
    alphabeta,
    cfg: CvConfig,
    seed: int = 0,
) -> float:
    """CV revenue minus width-budget and bound-order penalties.

    Standalone form; the bounds search reuses one CvRevenueEstimator across
    evaluations instead of refitting per call.
    """
    alphabeta = np.asarray(alphabeta, dtype=float)
    if alphabeta.ndim != 1 or alphabeta.shape[0] != 2 * data.m:
        raise ContractViolationError("alphabeta must be the concatenated 2m-vector")
    return _penalized_value(CvRevenueEstimator(data, cfg, seed), alphabeta, cfg)


def _scale_to_budget(alpha: np.ndarray, beta: np.ndarray, gamma: float):
    """Shrink widths uniformly about per-item midpoints until they fit gamma."""
    total = float(np.sum(beta - alpha))
    if total > gamma:
        factor = gamma / total if total > 0 else 0.0
        mid = 0.5 * (alpha + beta)
        half = 0.5 * (beta - alpha) * factor
        alpha, beta = mid - half, mid + half
    return alpha, beta


def cv_bounds_search(
    data: PriceDemandDataset,
    env: PriceEnvelope,
    cfg: CvConfig,
    seed: int = 0,
) -> PriceBox:
    """Search (alpha, beta) maximizing the penalized CV revenue estimate.

    The simplex runs over the 2m-vector with the envelope as its box; the
    final iterate is projected to hard feasibility (midpoint repair of any
    order violation, then uniform width scaling to the budget).
    """
    if data.m != env.m:
        raise ContractViolationError("dataset and envelope disagree on item count")
    estimator = CvRevenueEstimator(data, cfg, seed)
    m = data.m

    quarter = 0.25 * (env.pmax - env.pmin)
    alpha0, beta0 = _scale_to_budget(env.pmin + quarter, env.pmax - quarter, cfg.gamma)
    lower = np.concatenate([env.pmin, env.pmin])
    upper = np.concatenate([env.pmax, env.pmax])
    start = np.concatenate([alpha0, beta0])

    best, _ = nm_maximize(
        lambda x: _penalized_value(estimator, x, cfg),
        lower,
        upper,
        start,
        cfg.nm,
        seed=derive_seed(seed, "cv-nm"),
    )

    alpha, beta = best[:m], best[m:]
    bad = alpha > beta
    if bad.any():
        mid = 0.5 * (alpha + beta)
        alpha = np.where(bad, mid, alpha)
        beta = np.where(bad, mid, beta)
    alpha, beta = _scale_to_budget(alpha, beta, cfg.gamma)
    return PriceBox(alpha, beta, env.pmin, env.pmax)


def quantile_bounds(
    data: PriceDemandDataset,
    env: PriceEnvelope,
    cfg: QuantileConfig,
) -> PriceBox:
    """Central q-coverage interval of the historical prices, per item.

    Bounds sit at the (1-q)/2 and (1+q)/2 empirical quantiles (linear
    interpolation between order statistics), clipped to the envelope; q = 1
    reproduces the per-item data range.
    """
    if data.m != env.m:
        raise ContractViolationError("dataset and envelope disagree on item count")
    lo_level = (1.0 - cfg.q) / 2.0
    hi_level = (1.0 + cfg.q) / 2.0
    alpha = np.quantile(data.prices, lo_level, axis=0)
    beta = np.quantile(data.prices, hi_level, axis=0)
    alpha = np.clip(alpha, env.pmin, env.pmax)
    beta = np.clip(beta, env.pmin, env.pmax)
    return PriceBox(alpha, beta, env.pmin, env.pmax)
