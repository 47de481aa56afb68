"""Command-line interface.

Batch commands (run / replay / plots) execute locally against files; the
one-shot bounds command is a thin HTTP client for a running service
(`pricebounds serve`).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .harness import (
    ExperimentConfig,
    apply_env_overrides,
    emit_plot_series,
    replay_row,
    run_experiment,
)

ENV_HELP = (
    "Environment overrides: PRICEBOUNDS_OUTPUT_DIR replaces the config's "
    "output_dir; PRICEBOUNDS_WORKERS replaces the worker count."
)


def _cmd_run(args) -> int:
    with open(args.config) as fh:
        cfg = ExperimentConfig.from_dict(json.load(fh))
    cfg = apply_env_overrides(cfg)

    def log(status, key):
        m, n, delta, trial = key
        print(f"[{status}] m={m} n={n} delta={delta} trial={trial}", flush=True)

    rows = run_experiment(cfg, log=log if args.verbose else None)
    print(f"wrote {len(rows)} rows to {Path(cfg.output_dir) / 'results.csv'}")
    return 0


def _cmd_replay(args) -> int:
    report = replay_row(args.results, args.row)
    print(json.dumps(report, indent=2, default=list))
    if not report["match"]:
        print("replay mismatch", file=sys.stderr)
        return 1
    print(f"replay of row {args.row} matches stored metrics "
          f"(max deviation {report['max_deviation']:.3g})")
    return 0


def _cmd_plots(args) -> int:
    written = emit_plot_series(args.results, args.out)
    for path in written:
        print(path)
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return 0


def _cmd_bounds(args) -> int:
    import httpx

    from .synthetic import read_dataset_csv

    data = read_dataset_csv(args.data, trial=args.trial)
    payload = {
        "dataset": {"prices": data.prices.tolist(), "demands": data.demands.tolist()},
        "envelope": {"pmin": args.pmin, "pmax": args.pmax},
    }
    if args.method == "quantile":
        endpoint = "/bounds/quantile"
        payload["q"] = args.q
    elif args.method == "bootstrap":
        endpoint = "/bounds/bootstrap"
        payload.update(kappa=args.kappa, n_bootstrap=args.n_bootstrap, seed=args.seed)
    else:
        endpoint = "/bounds/cross-validation"
        payload.update(gamma=args.gamma, k_folds=args.k_folds, seed=args.seed)

    response = httpx.post(args.url.rstrip("/") + endpoint, json=payload, timeout=args.timeout)
    if response.status_code != 200:
        print(f"service error {response.status_code}: {response.text}", file=sys.stderr)
        return 1
    print(json.dumps(response.json(), indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pricebounds",
        description="Estimate profitable price bounds and run the evaluation grid.",
        epilog=ENV_HELP,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment grid from a JSON config",
                         epilog=ENV_HELP)
    run.add_argument("--config", required=True, help="JSON experiment config")
    run.add_argument("--verbose", action="store_true", help="log each finished trial")
    run.set_defaults(func=_cmd_run)

    replay = sub.add_parser("replay", help="re-execute one results row from its seed")
    replay.add_argument("--results", required=True, help="path to results.csv")
    replay.add_argument("--row", required=True, type=int, help="0-based data row index")
    replay.set_defaults(func=_cmd_replay)

    plots = sub.add_parser("plots", help="aggregate results into plot-data CSVs")
    plots.add_argument("--results", required=True, help="path to results.csv")
    plots.add_argument("--out", required=True, help="directory for plot-data files")
    plots.set_defaults(func=_cmd_plots)

    serve = sub.add_parser("serve", help="start the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.set_defaults(func=_cmd_serve)

    bounds = sub.add_parser(
        "bounds", help="estimate bounds for a dataset CSV via a running service"
    )
    bounds.add_argument("method", choices=["quantile", "bootstrap", "cross-validation"])
    bounds.add_argument("--data", required=True, help="dataset CSV (trial,i,item,price,demand)")
    bounds.add_argument("--trial", type=int, default=None, help="trial id inside the CSV")
    bounds.add_argument("--url", default="http://127.0.0.1:8000", help="service base URL")
    bounds.add_argument("--pmin", type=float, default=0.5)
    bounds.add_argument("--pmax", type=float, default=1.1)
    bounds.add_argument("--q", type=float, default=0.9, help="quantile coverage")
    bounds.add_argument("--kappa", type=float, default=1.645, help="bootstrap critical value")
    bounds.add_argument("--n-bootstrap", type=int, default=100)
    bounds.add_argument("--gamma", type=float, default=2.5, help="total width budget")
    bounds.add_argument("--k-folds", type=int, default=5)
    bounds.add_argument("--seed", type=int, default=0)
    bounds.add_argument("--timeout", type=float, default=300.0)
    bounds.set_defaults(func=_cmd_bounds)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
