"""Experiment grid runner: seeded trials across methods and parameter sweeps.

Each trial draws a synthetic ground truth and dataset, computes the
envelope-optimal reference prices once, then runs every requested
(method, sweep value) pair: estimate bounds, price against the full-data fit
inside them, and score relative revenue and average width.  Trials own
independent seed streams derived from (master seed, grid point, trial), so
any row can be replayed standalone from its recorded seed and deleting a
trial never shifts another trial's results.

Outputs under output_dir:
    results.csv   -- one row per (grid point, method, sweep value, trial)
    widths.csv    -- per-item R^2 / range-width scatter data (long format)
    run_meta.json -- config echo and counts (consumed by replay)
    partial/      -- one file per finished trial; interrupted runs resume
    failures.log  -- trials that raised or were flagged, with their seeds

All floats are serialized with 17 significant digits so that re-parsing and
re-serializing is byte-stable.  Wall-clock time for the bounds step covers
the bounds estimation plus the final inner pricing solve, and excludes
dataset generation and the reference-price computation.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .bootstrap import CONFIDENCE_KAPPA, BootstrapConfig, bootstrap_bounds
from .boxqp import QpSolverConfig, maximize_revenue_boxed
from .crossval import CvConfig, QuantileConfig, cv_bounds_search, quantile_bounds
from .errors import ContractViolationError, FlaggedTrialError
from .metrics import average_width, per_item_r2, relative_revenue
from .model import PriceEnvelope, eval_revenue
from .neldermead import NmConfig
from .ols import fit_ols
from .seeds import derive_seed
from .synthetic import SyntheticSpec, generate_dataset, oracle_optimal_prices

__all__ = [
    "ExperimentConfig",
    "ResultRow",
    "METHODS",
    "run_experiment",
    "emit_plot_series",
    "replay_row",
    "read_results_csv",
    "compute_trial_rows",
]

METHODS = ("quantile", "bootstrap", "cross_validation")
SWEEP_PARAM = {"quantile": "q", "bootstrap": "kappa", "cross_validation": "gamma"}

_DEFAULT_Q = tuple(round(0.60 + 0.05 * i, 2) for i in range(9))  # 60% .. 100%
_DEFAULT_KAPPA = tuple(
    CONFIDENCE_KAPPA[c] for c in (0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90, 0.95, 0.99, 1.00)
)
_DEFAULT_GAMMA = tuple(round(0.25 * i, 2) for i in range(1, 13))  # 0.25 .. 3.00


def fmt17(x: float) -> str:
    """17-significant-digit serialization; round-trips doubles exactly."""
    return f"{float(x):.17g}"


@dataclass(frozen=True)
class ExperimentConfig:
    ms: tuple[int, ...]
    ns: tuple[int, ...]
    deltas: tuple[float, ...]
    trials: int
    master_seed: int
    output_dir: str
    workers: int = 1
    pmin: float = 0.5
    pmax: float = 1.1
    methods: tuple[str, ...] = METHODS
    q_values: tuple[float, ...] = _DEFAULT_Q
    kappa_values: tuple[float, ...] = _DEFAULT_KAPPA
    gamma_values: tuple[float, ...] = _DEFAULT_GAMMA
    n_bootstrap: int = 100
    k_folds: int = 5
    lambda1: float = 1.0
    lambda2: float = 1.0
    nm_max_evals: int | None = None
    qp_restarts: int = 8
    independent_noise: bool = False

    def __post_init__(self):
        if not (self.ms and self.ns and self.deltas and self.methods):
            raise ContractViolationError("experiment grid must be non-empty")
        if self.trials < 1:
            raise ContractViolationError("trials must be positive")
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise ContractViolationError(f"unknown methods: {sorted(unknown)}")

    def sweeps(self) -> list[tuple[str, str, float]]:
        values = {
            "quantile": self.q_values,
            "bootstrap": self.kappa_values,
            "cross_validation": self.gamma_values,
        }
        return [
            (method, SWEEP_PARAM[method], float(v))
            for method in self.methods
            for v in values[method]
        ]

    def grid(self) -> list[tuple[int, int, float]]:
        return [(m, n, d) for m in self.ms for n in self.ns for d in self.deltas]

    @property
    def max_m(self) -> int:
        return max(self.ms)

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        env = raw.get("envelope", {})
        methods_cfg = raw.get("methods") or {m: {} for m in METHODS}
        unknown = set(methods_cfg) - set(METHODS)
        if unknown:
            raise ContractViolationError(f"unknown methods in config: {sorted(unknown)}")
        kwargs = dict(
            ms=tuple(int(v) for v in raw["m"]),
            ns=tuple(int(v) for v in raw["n"]),
            deltas=tuple(float(v) for v in raw["delta"]),
            trials=int(raw["trials"]),
            master_seed=int(raw["master_seed"]),
            output_dir=str(raw.get("output_dir", "pricebounds-out")),
            workers=int(raw.get("workers", 1)),
            pmin=float(env.get("pmin", 0.5)),
            pmax=float(env.get("pmax", 1.1)),
            methods=tuple(m for m in METHODS if m in methods_cfg),
            independent_noise=bool(raw.get("independent_noise", False)),
            qp_restarts=int(raw.get("qp_restarts", 8)),
        )
        q = methods_cfg.get("quantile", {})
        if "q" in q:
            kwargs["q_values"] = tuple(float(v) for v in q["q"])
        bs = methods_cfg.get("bootstrap", {})
        if "kappa" in bs:
            kwargs["kappa_values"] = tuple(float(v) for v in bs["kappa"])
        kwargs["n_bootstrap"] = int(bs.get("n_bootstrap", 100))
        cv = methods_cfg.get("cross_validation", {})
        if "gamma" in cv:
            kwargs["gamma_values"] = tuple(float(v) for v in cv["gamma"])
        kwargs["k_folds"] = int(cv.get("k_folds", 5))
        kwargs["lambda1"] = float(cv.get("lambda1", 1.0))
        kwargs["lambda2"] = float(cv.get("lambda2", 1.0))
        nm_evals = cv.get("nm_max_evals")
        kwargs["nm_max_evals"] = None if nm_evals is None else int(nm_evals)
        return cls(**kwargs)

    def to_dict(self) -> dict:
        return {
            "m": list(self.ms),
            "n": list(self.ns),
            "delta": list(self.deltas),
            "trials": self.trials,
            "master_seed": self.master_seed,
            "output_dir": self.output_dir,
            "workers": self.workers,
            "envelope": {"pmin": self.pmin, "pmax": self.pmax},
            "independent_noise": self.independent_noise,
            "qp_restarts": self.qp_restarts,
            "methods": {
                name: params
                for name, params in (
                    ("quantile", {"q": list(self.q_values)}),
                    (
                        "bootstrap",
                        {"kappa": list(self.kappa_values), "n_bootstrap": self.n_bootstrap},
                    ),
                    (
                        "cross_validation",
                        {
                            "gamma": list(self.gamma_values),
                            "k_folds": self.k_folds,
                            "lambda1": self.lambda1,
                            "lambda2": self.lambda2,
                            "nm_max_evals": self.nm_max_evals,
                        },
                    ),
                )
                if name in self.methods
            },
        }

    def fingerprint(self) -> str:
        """Hash of everything that affects computed values (not layout/workers)."""
        echo = self.to_dict()
        echo.pop("output_dir")
        echo.pop("workers")
        payload = json.dumps(echo, sort_keys=True).encode()
        return hashlib.blake2b(payload, digest_size=8).hexdigest()


@dataclass(frozen=True)
class ResultRow:
    m: int
    n: int
    delta: float
    method: str
    sweep_param: str
    sweep_value: float
    trial: int
    seed: int
    rel_revenue: float
    avg_width: float
    time_bounds_s: float
    r2: tuple[float, ...]
    item_widths: tuple[float, ...] = ()

    def sort_key(self):
        return (self.m, self.n, self.delta, self.trial, self.method, self.sweep_value)


def trial_seed_for(master_seed: int, m: int, n: int, delta: float, trial: int) -> int:
    return derive_seed(master_seed, m, n, float(delta), trial)


def _qp_config(cfg: ExperimentConfig) -> QpSolverConfig:
    return QpSolverConfig(restarts=cfg.qp_restarts)


def bounds_for_method(cfg: ExperimentConfig, method, sweep_value, data, env, qp, trial_seed):
    seed = derive_seed(trial_seed, method, float(sweep_value))
    if method == "quantile":
        return quantile_bounds(data, env, QuantileConfig(sweep_value))
    if method == "bootstrap":
        return bootstrap_bounds(
            data, env, BootstrapConfig(cfg.n_bootstrap, sweep_value), qp, seed
        )
    if method == "cross_validation":
        cv_cfg = CvConfig(
            gamma=sweep_value,
            k_folds=cfg.k_folds,
            lambda1=cfg.lambda1,
            lambda2=cfg.lambda2,
            nm=NmConfig(max_evals=cfg.nm_max_evals),
            qp=qp,
        )
        return cv_bounds_search(data, env, cv_cfg, seed)
    raise ContractViolationError(f"unknown method {method!r}")


def _trial_assets(cfg: ExperimentConfig, m: int, n: int, delta: float, tseed: int):
    spec = SyntheticSpec(
        m=m, n=n, delta=delta, seed=tseed, shared_noise=not cfg.independent_noise
    )
    theta_star, data = generate_dataset(spec)
    env = PriceEnvelope.uniform(m, cfg.pmin, cfg.pmax)
    qp = _qp_config(cfg)
    theta_hat = fit_ols(data)
    p_star = oracle_optimal_prices(theta_star, env, qp, seed=derive_seed(tseed, "pstar"))
    if not eval_revenue(theta_star, p_star) > 0:
        raise FlaggedTrialError(
            f"reference revenue not positive for m={m} n={n} delta={delta} seed={tseed}"
        )
    r2 = per_item_r2(theta_hat, data)
    return theta_star, data, env, qp, theta_hat, p_star, r2


def compute_trial_rows(cfg: ExperimentConfig, m: int, n: int, delta: float, trial: int):
    """Every (method, sweep value) row of one trial."""
    tseed = trial_seed_for(cfg.master_seed, m, n, delta, trial)
    theta_star, data, env, qp, theta_hat, p_star, r2 = _trial_assets(cfg, m, n, delta, tseed)
    rows = []
    for method, param, value in cfg.sweeps():
        start = time.perf_counter()
        box = bounds_for_method(cfg, method, value, data, env, qp, tseed)
        p_hat = maximize_revenue_boxed(
            theta_hat, box, qp, seed=derive_seed(tseed, method, value, "inner")
        )
        elapsed = time.perf_counter() - start
        rows.append(
            ResultRow(
                m=m,
                n=n,
                delta=delta,
                method=method,
                sweep_param=param,
                sweep_value=value,
                trial=trial,
                seed=tseed,
                rel_revenue=relative_revenue(theta_star, p_hat, p_star),
                avg_width=average_width(box),
                time_bounds_s=elapsed,
                r2=tuple(float(v) for v in r2),
                item_widths=tuple(float(w) for w in box.widths),
            )
        )
    return rows


# ---------------------------------------------------------------------------
# CSV layer


def results_header(max_m: int) -> list[str]:
    return [
        "m", "n", "delta", "method", "sweep_param", "sweep_value", "trial", "seed",
        "rel_revenue", "avg_width", "time_bounds_s",
        *(f"r2_item_{i}" for i in range(max_m)),
    ]


def _row_fields(row: ResultRow, max_m: int, with_widths: bool) -> list[str]:
    pad = [""] * (max_m - len(row.r2))
    fields = [
        str(row.m), str(row.n), fmt17(row.delta), row.method, row.sweep_param,
        fmt17(row.sweep_value), str(row.trial), str(row.seed),
        fmt17(row.rel_revenue), fmt17(row.avg_width), fmt17(row.time_bounds_s),
        *(fmt17(v) for v in row.r2), *pad,
    ]
    if with_widths:
        fields += [*(fmt17(w) for w in row.item_widths), *pad]
    return fields


def _write_rows_csv(path: Path, rows, max_m: int, with_widths: bool) -> None:
    header = results_header(max_m)
    if with_widths:
        header = header + [f"width_item_{i}" for i in range(max_m)]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(_row_fields(row, max_m, with_widths))


def _parse_row(record: dict) -> ResultRow:
    r2 = []
    widths = []
    for key, value in record.items():
        if value in (None, ""):
            continue
        if key.startswith("r2_item_"):
            r2.append((int(key.rsplit("_", 1)[1]), float(value)))
        elif key.startswith("width_item_"):
            widths.append((int(key.rsplit("_", 1)[1]), float(value)))
    return ResultRow(
        m=int(record["m"]),
        n=int(record["n"]),
        delta=float(record["delta"]),
        method=record["method"],
        sweep_param=record["sweep_param"],
        sweep_value=float(record["sweep_value"]),
        trial=int(record["trial"]),
        seed=int(record["seed"]),
        rel_revenue=float(record["rel_revenue"]),
        avg_width=float(record["avg_width"]),
        time_bounds_s=float(record["time_bounds_s"]),
        r2=tuple(v for _, v in sorted(r2)),
        item_widths=tuple(v for _, v in sorted(widths)),
    )


def read_results_csv(path) -> list[ResultRow]:
    with open(path, newline="") as fh:
        return [_parse_row(rec) for rec in csv.DictReader(fh)]


def _write_widths_csv(path: Path, rows) -> None:
    header = [
        "m", "n", "delta", "method", "sweep_param", "sweep_value", "trial", "seed",
        "item", "r2", "width",
    ]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            for item, (r2, width) in enumerate(zip(row.r2, row.item_widths)):
                writer.writerow([
                    row.m, row.n, fmt17(row.delta), row.method, row.sweep_param,
                    fmt17(row.sweep_value), row.trial, row.seed,
                    item, fmt17(r2), fmt17(width),
                ])


# ---------------------------------------------------------------------------
# Grid execution


def _delta_token(delta: float) -> str:
    return fmt17(delta).replace(".", "p").replace("-", "m")


def _partial_name(m: int, n: int, delta: float, trial: int) -> str:
    return f"trial_m{m}_n{n}_d{_delta_token(delta)}_t{trial}.csv"


def _run_trial_task(args):
    cfg, m, n, delta, trial = args
    tseed = trial_seed_for(cfg.master_seed, m, n, delta, trial)
    try:
        return ("ok", (m, n, delta, trial), compute_trial_rows(cfg, m, n, delta, trial))
    except FlaggedTrialError as exc:
        return ("flagged", (m, n, delta, trial), f"seed={tseed} {exc}")
    except Exception as exc:  # logged and skipped, the grid must survive
        return ("failed", (m, n, delta, trial), f"seed={tseed} {type(exc).__name__}: {exc}")


def run_experiment(cfg: ExperimentConfig, log=None) -> list[ResultRow]:
    """Run the grid, write results incrementally, and finalize sorted CSVs.

    Partial per-trial files make interrupted runs resumable; a fingerprint of
    the value-affecting config guards against resuming with a different one.
    Output file content is independent of the worker count.
    """
    out = Path(cfg.output_dir)
    partial_dir = out / "partial"
    partial_dir.mkdir(parents=True, exist_ok=True)

    fp_file = partial_dir / "fingerprint.txt"
    fingerprint = cfg.fingerprint()
    if fp_file.exists():
        previous = fp_file.read_text().strip()
        if previous != fingerprint:
            raise ContractViolationError(
                f"output dir holds partial results for a different config "
                f"({previous} != {fingerprint}); use a fresh output_dir"
            )
    else:
        fp_file.write_text(fingerprint + "\n")

    tasks = [
        (m, n, delta, trial)
        for (m, n, delta) in cfg.grid()
        for trial in range(cfg.trials)
    ]
    rows: list[ResultRow] = []
    pending = []
    for key in tasks:
        pfile = partial_dir / _partial_name(*key)
        if pfile.exists():
            rows.extend(read_results_csv(pfile))
        else:
            pending.append(key)

    flagged = failed = 0

    def handle(outcome):
        nonlocal flagged, failed
        status, key, payload = outcome
        if status == "ok":
            _write_rows_csv(partial_dir / _partial_name(*key), payload, cfg.max_m, True)
            rows.extend(payload)
        else:
            if status == "flagged":
                flagged += 1
            else:
                failed += 1
            with open(out / "failures.log", "a") as fh:
                m, n, delta, trial = key
                fh.write(
                    f"{status} m={m} n={n} delta={fmt17(delta)} trial={trial} {payload}\n"
                )
        if log is not None:
            log(status, key)

    if cfg.workers <= 1 or len(pending) <= 1:
        for key in pending:
            handle(_run_trial_task((cfg, *key)))
    else:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            futures = [pool.submit(_run_trial_task, (cfg, *key)) for key in pending]
            for future in as_completed(futures):
                handle(future.result())

    rows.sort(key=ResultRow.sort_key)
    _write_rows_csv(out / "results.csv", rows, cfg.max_m, False)
    _write_widths_csv(out / "widths.csv", rows)
    meta = {
        "config": cfg.to_dict(),
        "fingerprint": fingerprint,
        "max_m": cfg.max_m,
        "n_rows": len(rows),
        "flagged_trials": flagged,
        "failed_trials": failed,
    }
    with open(out / "run_meta.json", "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return rows


# ---------------------------------------------------------------------------
# Plot-series emission


def _sem(values: np.ndarray) -> float:
    if values.size <= 1:
        return 0.0
    return float(values.std(ddof=1) / math.sqrt(values.size))


def emit_plot_series(results_path, out_dir, group_keys=("m", "n", "delta", "method")) -> list[Path]:
    """Aggregate a results file into per-group plot-data CSVs.

    For each (m, n, delta, method): one file of per-sweep-value means and
    standard errors of average width and relative revenue.  For each
    (n, delta, method): one timing file of mean seconds per item count.
    """
    rows = read_results_csv(results_path)
    if not rows:
        raise ContractViolationError("results file has no rows")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    def group_of(row):
        return tuple(getattr(row, key) for key in group_keys)

    groups: dict[tuple, list[ResultRow]] = {}
    for row in rows:
        groups.setdefault(group_of(row), []).append(row)

    for key in sorted(groups, key=str):
        bucket = groups[key]
        label = dict(zip(group_keys, key))
        name = "series_m{m}_n{n}_d{d}_{method}.csv".format(
            m=label.get("m", "all"),
            n=label.get("n", "all"),
            d=_delta_token(label["delta"]) if "delta" in label else "all",
            method=label.get("method", "all"),
        )
        by_sweep: dict[float, list[ResultRow]] = {}
        for row in bucket:
            by_sweep.setdefault(row.sweep_value, []).append(row)
        path = out / name
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow([
                "sweep_value", "mean_avg_width", "sem_avg_width",
                "mean_rel_revenue", "sem_rel_revenue", "n_trials",
            ])
            for value in sorted(by_sweep):
                widths = np.array([r.avg_width for r in by_sweep[value]])
                revs = np.array([r.rel_revenue for r in by_sweep[value]])
                writer.writerow([
                    fmt17(value), fmt17(widths.mean()), fmt17(_sem(widths)),
                    fmt17(revs.mean()), fmt17(_sem(revs)), len(by_sweep[value]),
                ])
        written.append(path)

    timing_groups: dict[tuple, dict[int, list[float]]] = {}
    for row in rows:
        per_m = timing_groups.setdefault((row.n, row.delta, row.method), {})
        per_m.setdefault(row.m, []).append(row.time_bounds_s)
    for (n, delta, method), per_m in sorted(timing_groups.items(), key=str):
        path = out / f"timing_n{n}_d{_delta_token(delta)}_{method}.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["m", "mean_time_s", "sem_time_s"])
            for m in sorted(per_m):
                times = np.array(per_m[m])
                writer.writerow([m, fmt17(times.mean()), fmt17(_sem(times))])
        written.append(path)
    return written


# ---------------------------------------------------------------------------
# Replay


def replay_row(results_path, row_id: int, tolerance: float = 1e-12) -> dict:
    """Re-execute one results row from its recorded seed and compare metrics.

    Reads run_meta.json next to the results file for the method parameters.
    Timing is a measurement, not a computation, and is not compared.
    """
    results_path = Path(results_path)
    rows = read_results_csv(results_path)
    if not 0 <= row_id < len(rows):
        raise ContractViolationError(f"row {row_id} out of range [0, {len(rows)})")
    stored = rows[row_id]

    meta_path = results_path.parent / "run_meta.json"
    if not meta_path.exists():
        raise ContractViolationError(f"missing {meta_path}; replay needs the run config")
    with open(meta_path) as fh:
        cfg = ExperimentConfig.from_dict(json.load(fh)["config"])

    tseed = trial_seed_for(cfg.master_seed, stored.m, stored.n, stored.delta, stored.trial)
    if tseed != stored.seed:
        raise ContractViolationError(
            f"stored seed {stored.seed} does not match config derivation {tseed}"
        )
    theta_star, data, env, qp, theta_hat, p_star, r2 = _trial_assets(
        cfg, stored.m, stored.n, stored.delta, tseed
    )
    box = bounds_for_method(cfg, stored.method, stored.sweep_value, data, env, qp, tseed)
    p_hat = maximize_revenue_boxed(
        theta_hat, box, qp, seed=derive_seed(tseed, stored.method, stored.sweep_value, "inner")
    )
    recomputed = {
        "rel_revenue": relative_revenue(theta_star, p_hat, p_star),
        "avg_width": average_width(box),
        "r2": tuple(float(v) for v in r2),
    }
    deviations = [
        abs(recomputed["rel_revenue"] - stored.rel_revenue),
        abs(recomputed["avg_width"] - stored.avg_width),
        *(
            0.0 if (math.isnan(a) and math.isnan(b)) else abs(a - b)
            for a, b in zip(recomputed["r2"], stored.r2)
        ),
    ]
    return {
        "row": row_id,
        "stored": {
            "rel_revenue": stored.rel_revenue,
            "avg_width": stored.avg_width,
            "r2": stored.r2,
        },
        "recomputed": recomputed,
        "max_deviation": max(deviations),
        "match": max(deviations) <= tolerance,
    }


def apply_env_overrides(cfg: ExperimentConfig) -> ExperimentConfig:
    """PRICEBOUNDS_OUTPUT_DIR and PRICEBOUNDS_WORKERS override the config."""
    out = os.environ.get("PRICEBOUNDS_OUTPUT_DIR")
    workers = os.environ.get("PRICEBOUNDS_WORKERS")
    if out:
        cfg = replace(cfg, output_dir=out)
    if workers:
        cfg = replace(cfg, workers=int(workers))
    return cfg
