"""Derivative-free Nelder-Mead simplex maximization over a box.

Box handling is by clipping: every candidate vertex is projected into
[lower, upper] before the objective sees it, so the method never evaluates
an infeasible point and the returned point is feasible by construction.
Non-box constraints are expected to be folded into the objective as penalty
terms by the caller.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ContractViolationError
from .seeds import substream

__all__ = ["NmConfig", "nm_maximize"]


@dataclass(frozen=True)
class NmConfig:
    """Termination and step parameters.

    max_evals defaults to 400 evaluations per dimension when left as None.
    init_step is the initial simplex edge as a fraction of each box width.
    """

    max_evals: int | None = None
    x_tol: float = 1e-4
    f_tol: float = 1e-6
    init_step: float = 0.1
    reflection: float = 1.0
    expansion: float = 2.0
    contraction: float = 0.5
    shrink: float = 0.5

    def __post_init__(self):
        if self.max_evals is not None and self.max_evals < 1:
            raise ContractViolationError("max_evals must be positive")
        for name in ("x_tol", "f_tol", "init_step", "reflection", "expansion",
                     "contraction", "shrink"):
            if not getattr(self, name) > 0:
                raise ContractViolationError(f"{name} must be positive")
        if not self.expansion > self.reflection:
            raise ContractViolationError("expansion must exceed reflection")


class _BudgetExhausted(Exception):
    pass


class _Evaluator:
    """Clips, evaluates, counts, and tracks the best point ever seen."""

    def __init__(self, objective, lower, upper, max_evals, trace):
        self.objective = objective
        self.lower = lower
        self.upper = upper
        self.max_evals = max_evals
        self.trace = trace
        self.count = 0
        self.best_x = None
        self.best_f = -np.inf

    def __call__(self, x: np.ndarray) -> tuple[np.ndarray, float]:
        if self.count >= self.max_evals:
            raise _BudgetExhausted
        x = np.clip(x, self.lower, self.upper)
        fx = self.objective(x)
        fx = float(fx) if np.isfinite(fx) else -np.inf
        self.count += 1
        if self.trace is not None:
            self.trace(x, fx)
        if fx > self.best_f or self.best_x is None:
            self.best_x = x.copy()
            self.best_f = fx
        return x, fx


def _initial_simplex(start, lower, upper, widths, cfg, rng):
    """Start vertex plus one perturbed vertex per coordinate, reflected
    inward where the offset would exit the box; exact duplicates (clipped or
    zero-width axes) are repaired with seeded jitter."""
    d = start.shape[0]
    vertices = [start.copy()]
    for k in range(d):
        v = start.copy()
        off = cfg.init_step * widths[k]
        if v[k] + off > upper[k]:
            v[k] -= off
        else:
            v[k] += off
        vertices.append(np.clip(v, lower, upper))
    for i in range(1, d + 1):
        for _ in range(3):
            if not any(np.array_equal(vertices[i], vertices[j]) for j in range(i)):
                break
            jitter = rng.uniform(-1.0, 1.0, size=d) * 0.01 * widths
            vertices[i] = np.clip(vertices[i] + jitter, lower, upper)
    return vertices


def nm_maximize(
    objective: Callable[[np.ndarray], float],
    lower,
    upper,
    start,
    cfg: NmConfig = NmConfig(),
    seed: int = 0,
    trace: Callable[[np.ndarray, float], None] | None = None,
) -> tuple[np.ndarray, float]:
    """Maximize a black-box objective over the box [lower, upper].

    Returns the best evaluated point and its value.  Every evaluated point is
    clipped into the box first; non-finite objective values are treated as
    -inf.  Terminates when the simplex diameter drops below x_tol, the value
    spread drops below f_tol, or the evaluation budget is spent.  Deterministic
    given (inputs, seed); the seed only feeds the degenerate-simplex jitter.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    start = np.asarray(start, dtype=float)
    if np.any(lower > upper):
        raise ContractViolationError("nm_maximize requires lower <= upper")
    if np.any(start < lower) or np.any(start > upper):
        raise ContractViolationError("start point must lie inside the box")

    d = start.shape[0]
    widths = upper - lower
    max_evals = cfg.max_evals if cfg.max_evals is not None else 400 * d
    ev = _Evaluator(objective, lower, upper, max_evals, trace)
    rng = substream(seed, "nm-jitter")

    try:
        vertices = _initial_simplex(start, lower, upper, widths, cfg, rng)
        simplex = []
        for v in vertices:
            simplex.append(ev(v))

        while True:
            simplex.sort(key=lambda vf: -vf[1])
            xs = [vf[0] for vf in simplex]
            fs = [vf[1] for vf in simplex]
            diameter = max(np.max(np.abs(x - xs[0])) for x in xs[1:]) if d else 0.0
            spread = fs[0] - fs[-1]
            if diameter <= cfg.x_tol or spread <= cfg.f_tol:
                break

            worst_x, worst_f = simplex[-1]
            centroid = np.mean(xs[:-1], axis=0)
            direction = centroid - worst_x

            xr, fr = ev(centroid + cfg.reflection * direction)
            if fr > fs[0]:
                xe, fe = ev(centroid + cfg.expansion * direction)
                simplex[-1] = (xe, fe) if fe > fr else (xr, fr)
            elif fr > fs[-2]:
                simplex[-1] = (xr, fr)
            elif fr > worst_f:
                xc, fc = ev(centroid + cfg.contraction * direction)
                if fc >= fr:
                    simplex[-1] = (xc, fc)
                else:
                    simplex = _shrink(simplex, ev, cfg)
            else:
                xc, fc = ev(centroid - cfg.contraction * direction)
                if fc > worst_f:
                    simplex[-1] = (xc, fc)
                else:
                    simplex = _shrink(simplex, ev, cfg)
    except _BudgetExhausted:
        pass

    return ev.best_x.copy(), ev.best_f


def _shrink(simplex, ev, cfg):
    best_x = simplex[0][0]
    out = [simplex[0]]
    for x, _ in simplex[1:]:
        out.append(ev(best_x + cfg.shrink * (x - best_x)))
    return out
