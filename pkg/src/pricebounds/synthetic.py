"""Synthetic ground-truth models and price-demand datasets.

Ground-truth coefficients are drawn per item: intercept uniform on [m, 3m],
own-price effect uniform on [-3m, -2m], cross-price effects uniform on
[0, 3].  Historical prices are normal with mean 0.8 and sd 0.1 (never
clipped), and demands add one shared Gaussian disturbance per instance whose
variance is calibrated so the realized noise-to-signal ratio matches the
requested level delta.

All sampling uses counter-based substreams of the spec seed, so datasets are
byte-reproducible across machines and independent of generation order.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .boxqp import DEFAULT_QP, QpSolverConfig, maximize_revenue_boxed
from .errors import ContractViolationError
from .model import CoeffMatrix, PriceBox, PriceDemandDataset, PriceEnvelope
from .ols import design_matrix
from .seeds import substream

__all__ = [
    "SyntheticSpec",
    "sample_ground_truth",
    "calibrate_noise_sigma",
    "generate_dataset",
    "realized_noise_level",
    "oracle_optimal_prices",
    "write_dataset_csv",
    "read_dataset_csv",
    "write_ground_truth_csv",
    "read_ground_truth_csv",
]


@dataclass(frozen=True)
class SyntheticSpec:
    m: int
    n: int
    delta: float
    price_mean: float = 0.8
    price_sd: float = 0.1
    seed: int = 0
    shared_noise: bool = True  # one disturbance per instance, common to items

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise ContractViolationError("m and n must be positive")
        if not 0.0 <= self.delta < 1.0:
            raise ContractViolationError("delta must lie in [0, 1)")
        if not self.price_sd >= 0:
            raise ContractViolationError("price_sd must be nonnegative")


def sample_ground_truth(spec: SyntheticSpec) -> CoeffMatrix:
    """Draw a ground-truth coefficient matrix for the given item count."""
    rng = substream(spec.seed, "truth-coeffs")
    m = spec.m
    intercepts = rng.uniform(m, 3.0 * m, size=m)
    effects = rng.uniform(0.0, 3.0, size=(m, m))
    diag = rng.uniform(-3.0 * m, -2.0 * m, size=m)
    effects[np.arange(m), np.arange(m)] = diag
    return CoeffMatrix(np.vstack([intercepts, effects]))


def calibrate_noise_sigma(theta_star: CoeffMatrix, prices: np.ndarray, delta: float) -> float:
    """Noise sd that realizes noise level delta in expectation.

    With M the mean squared noise-free demand over the given prices,
    sigma^2 = delta^2 * M / (1 - delta^2) makes the expected mean squared
    noisy demand equal M + sigma^2 = M / (1 - delta^2), so the realized
    ratio sigma^2 / E[d^2] equals delta^2.
    """
    if not 0.0 <= delta < 1.0:
        raise ContractViolationError("delta must lie in [0, 1)")
    clean = design_matrix(np.asarray(prices, dtype=float)) @ theta_star.entries
    mean_sq = float(np.mean(clean**2))
    return delta * np.sqrt(mean_sq / (1.0 - delta**2))


def generate_dataset(spec: SyntheticSpec) -> tuple[CoeffMatrix, PriceDemandDataset]:
    """Ground truth plus a noisy dataset drawn from it."""
    theta_star = sample_ground_truth(spec)
    prices = substream(spec.seed, "prices").normal(
        spec.price_mean, spec.price_sd, size=(spec.n, spec.m)
    )
    sigma = calibrate_noise_sigma(theta_star, prices, spec.delta)
    clean = design_matrix(prices) @ theta_star.entries
    noise_rng = substream(spec.seed, "noise")
    if spec.shared_noise:
        noise = noise_rng.normal(0.0, sigma, size=spec.n)[:, None]
    else:
        noise = noise_rng.normal(0.0, sigma, size=(spec.n, spec.m))
    return theta_star, PriceDemandDataset(prices, clean + noise)


def realized_noise_level(data: PriceDemandDataset, sigma: float) -> float:
    """Recompute the noise level from a dataset and the sd that generated it."""
    return float(np.sqrt(data.n * data.m * sigma**2 / np.sum(data.demands**2)))


def oracle_optimal_prices(
    theta_star: CoeffMatrix,
    env: PriceEnvelope,
    qp: QpSolverConfig = DEFAULT_QP,
    seed: int = 0,
) -> np.ndarray:
    """Envelope-optimal prices for a known coefficient matrix."""
    return maximize_revenue_boxed(theta_star, PriceBox.full(env), qp, seed)


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_dataset_csv(path, data: PriceDemandDataset, trial: int = 0) -> None:
    """One row per (instance, item): trial,i,item,price,demand (0-based)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["trial", "i", "item", "price", "demand"])
        for i in range(data.n):
            for j in range(data.m):
                writer.writerow([trial, i, j, _fmt(data.prices[i, j]), _fmt(data.demands[i, j])])


def read_dataset_csv(path, trial: int | None = None) -> PriceDemandDataset:
    cells: dict[tuple[int, int], tuple[float, float]] = {}
    trials = set()
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            t = int(row["trial"])
            trials.add(t)
            if trial is not None and t != trial:
                continue
            cells[(int(row["i"]), int(row["item"]))] = (float(row["price"]), float(row["demand"]))
    if trial is None and len(trials) > 1:
        raise ContractViolationError(
            f"file holds trials {sorted(trials)}; pass trial= to pick one"
        )
    if not cells:
        raise ContractViolationError("no rows matched the requested trial")
    n = max(i for i, _ in cells) + 1
    m = max(j for _, j in cells) + 1
    prices = np.empty((n, m))
    demands = np.empty((n, m))
    for (i, j), (p, d) in cells.items():
        prices[i, j] = p
        demands[i, j] = d
    return PriceDemandDataset(prices, demands)


def write_ground_truth_csv(path, theta: CoeffMatrix) -> None:
    """One row per coefficient: item,ell,theta with ell = 0 for the intercept."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["item", "ell", "theta"])
        for j in range(theta.m):
            for ell in range(theta.m + 1):
                writer.writerow([j, ell, _fmt(theta.entries[ell, j])])


def read_ground_truth_csv(path) -> CoeffMatrix:
    cells: dict[tuple[int, int], float] = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            cells[(int(row["ell"]), int(row["item"]))] = float(row["theta"])
    if not cells:
        raise ContractViolationError("empty ground-truth file")
    m = max(j for _, j in cells) + 1
    entries = np.empty((m + 1, m))
    for (ell, j), v in cells.items():
        entries[ell, j] = v
    return CoeffMatrix(entries)
