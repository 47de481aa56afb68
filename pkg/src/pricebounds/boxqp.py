"""Box-constrained quadratic revenue maximization.

The inner pricing problem is max_p p'Ap + b'p subject to lower <= p <= upper.
With the coefficient distributions used throughout this package the
symmetrized A is negative definite with overwhelming probability, so the
problem is concave and projected gradient ascent converges to the global
maximum from any start; multi-start from box corners and random interior
points insures against the rare indefinite draw.  A brute-force grid oracle
is provided for verification at small m.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import ContractViolationError, InfeasibleBoxError
from .model import CoeffMatrix, PriceBox, quadratic_coeffs
from .seeds import substream

__all__ = ["QpSolverConfig", "maximize_revenue_boxed", "grid_oracle", "pgd_maximize_quadratic"]

_ARMIJO = 1e-4
_MIN_STEP = 1e-18


@dataclass(frozen=True)
class QpSolverConfig:
    restarts: int = 8
    max_iters: int = 500
    step_tol: float = 1e-8
    value_tol: float = 1e-9

    def __post_init__(self):
        if self.restarts < 1 or self.max_iters < 1:
            raise ContractViolationError("restarts and max_iters must be positive")
        if not (self.step_tol > 0 and np.isfinite(self.step_tol)):
            raise ContractViolationError("step_tol must be positive and finite")
        if not (self.value_tol > 0 and np.isfinite(self.value_tol)):
            raise ContractViolationError("value_tol must be positive and finite")


DEFAULT_QP = QpSolverConfig()


def _ascend(A, b, lower, upper, start, lipschitz, cfg) -> tuple[np.ndarray, float]:
    """Projected gradient ascent with backtracking from one start point."""
    p = np.clip(start, lower, upper)
    fp = p @ A @ p + b @ p
    t = 1.0 / lipschitz
    stalls = 0
    for _ in range(cfg.max_iters):
        g = 2.0 * (A @ p) + b
        pg = p - np.clip(p + g, lower, upper)
        if np.linalg.norm(pg) <= cfg.step_tol:
            break
        accepted_first_try = True
        while True:
            q = np.clip(p + t * g, lower, upper)
            fq = q @ A @ q + b @ q
            if fq >= fp + _ARMIJO * (g @ (q - p)):
                break
            t *= 0.5
            accepted_first_try = False
            if t < _MIN_STEP:
                return p, fp
        gain = fq - fp
        p, fp = q, fq
        if accepted_first_try:
            t = min(t * 1.5, 100.0 / lipschitz)
        if gain <= cfg.value_tol:
            stalls += 1
            if stalls >= 2:
                break
        else:
            stalls = 0
    return p, fp


def pgd_maximize_quadratic(
    A: np.ndarray,
    b: np.ndarray,
    lower: np.ndarray,
    upper: np.ndarray,
    cfg: QpSolverConfig = DEFAULT_QP,
    seed: int = 0,
    eigs: np.ndarray | None = None,
) -> np.ndarray:
    """Maximize p'Ap + b'p over the box [lower, upper].

    Deterministic given (inputs, seed).  Raw-array entry point used by the
    bounds-estimation hot paths; `maximize_revenue_boxed` is the typed wrapper.
    Callers solving the same A over many boxes may pass eigs=eigvalsh(A).
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    if np.any(lower > upper):
        raise InfeasibleBoxError("lower bound exceeds upper bound")
    if np.array_equal(lower, upper):
        return lower.copy()

    if eigs is None:
        eigs = np.linalg.eigvalsh(A)
    lipschitz = 2.0 * max(abs(eigs[0]), abs(eigs[-1]))
    if lipschitz == 0.0:
        # Pure linear objective: optimum sits at a corner.
        return np.where(b > 0, upper, lower).astype(float)

    if eigs[-1] <= 0.0:
        # Concave: any start reaches the global maximum, one suffices.
        starts = [0.5 * (lower + upper)]
    else:
        starts = [lower, upper]
        rng = substream(seed, "qp-starts")
        for _ in range(max(cfg.restarts - 2, 0)):
            starts.append(rng.uniform(lower, upper))
        starts = starts[: cfg.restarts]

    best_p, best_f = None, -np.inf
    for start in starts:
        p, fp = _ascend(A, b, lower, upper, start, lipschitz, cfg)
        if best_p is None or fp > best_f:
            best_p, best_f = p, fp
    return np.clip(best_p, lower, upper)


def maximize_revenue_boxed(
    theta: CoeffMatrix,
    box: PriceBox,
    cfg: QpSolverConfig = DEFAULT_QP,
    seed: int = 0,
) -> np.ndarray:
    """Revenue-maximizing prices within [box.alpha, box.beta]."""
    A, b = quadratic_coeffs(theta)
    if box.m != theta.m:
        raise ContractViolationError("box and coefficient matrix disagree on item count")
    return pgd_maximize_quadratic(A, b, box.alpha, box.beta, cfg, seed)


def _axis_points(lo: float, hi: float, resolution: float) -> np.ndarray:
    count = int(np.floor((hi - lo) / resolution + 1e-9)) + 1
    pts = lo + np.arange(count) * resolution
    if pts[-1] < hi - 1e-12 * max(1.0, abs(hi)):
        pts = np.append(pts, hi)
    return pts

def grid_oracle(theta: CoeffMatrix, box: PriceBox, resolution: float) -> np.ndarray:
    """Exhaustive search on the axis-aligned grid with the given spacing.

    Both endpoints of every axis are included.  Refuses m > 4: the grid is
    exponential in m and exists purely as a verification oracle.
    """
    m = theta.m
    if m > 4:
        raise ContractViolationError(
            f"grid_oracle refuses m={m}: combinatorial guard admits m <= 4 only"
        )
    if not (resolution > 0 and np.isfinite(resolution)):
        raise ContractViolationError("resolution must be positive and finite")

    axes = [_axis_points(box.alpha[j], box.beta[j], resolution) for j in range(m)]
    A, b = quadratic_coeffs(theta)

    # Vectorize the trailing two axes; iterate the (small) leading product.
    tail = axes[-2:] if m >= 2 else axes
    lead = axes[:-2] if m >= 2 else []
    if len(tail) == 2:
        t0, t1 = np.meshgrid(tail[0], tail[1], indexing="ij")
        tail_grid = np.column_stack([t0.ravel(), t1.ravel()])
    else:
        tail_grid = tail[0][:, None]

    n_tail = tail_grid.shape[0]
    best_val, best_p = -np.inf, None
    points = np.empty((n_tail, m))
    points[:, m - tail_grid.shape[1]:] = tail_grid
    for head in itertools.product(*lead):
        if head:
            points[:, : len(head)] = head
        vals = np.einsum("ij,jk,ik->i", points, A, points) + points @ b
        i = int(np.argmax(vals))
        if vals[i] > best_val:
            best_val = float(vals[i])
            best_p = points[i].copy()
    return best_p
