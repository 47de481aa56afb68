"""FastAPI wrapper around the core estimation operations.

The service handles one-shot requests (fit, optimize, bounds, synthetic
data); the batch experiment grid stays in the CLI, which operates on local
files and is long-running by nature.
"""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI
from fastapi.responses import JSONResponse

from .. import __version__
from ..bootstrap import BootstrapConfig, bootstrap_bounds
from ..boxqp import maximize_revenue_boxed
from ..crossval import CvConfig, QuantileConfig, cv_bounds_search, quantile_bounds
from ..errors import ContractViolationError
from ..metrics import average_width
from ..model import CoeffMatrix, PriceBox, PriceDemandDataset, PriceEnvelope, eval_revenue
from ..neldermead import NmConfig
from ..ols import fit_ols
from ..synthetic import SyntheticSpec, calibrate_noise_sigma, generate_dataset
from . import schemas


def _dataset(payload: schemas.DatasetPayload) -> PriceDemandDataset:
    return PriceDemandDataset(np.array(payload.prices), np.array(payload.demands))


def _envelope(payload: schemas.EnvelopePayload, m: int) -> PriceEnvelope:
    def expand(v):
        return np.full(m, float(v)) if np.isscalar(v) else np.asarray(v, dtype=float)

    return PriceEnvelope(expand(payload.pmin), expand(payload.pmax))


def _bounds_response(box: PriceBox) -> schemas.BoundsResponse:
    return schemas.BoundsResponse(
        alpha=box.alpha.tolist(), beta=box.beta.tolist(), average_width=average_width(box)
    )


def create_app() -> FastAPI:
    app = FastAPI(title="pricebounds", version=__version__)

    @app.exception_handler(ContractViolationError)
    async def contract_violation(_, exc: ContractViolationError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.get("/health", response_model=schemas.HealthResponse)
    def health():
        return schemas.HealthResponse(status="ok", version=__version__)

    @app.post("/fit", response_model=schemas.FitResponse)
    def fit(request: schemas.FitRequest):
        theta = fit_ols(_dataset(request.dataset))
        return schemas.FitResponse(coefficients=theta.entries.tolist())

    @app.post("/optimize", response_model=schemas.OptimizeResponse)
    def optimize(request: schemas.OptimizeRequest):
        theta = CoeffMatrix(np.array(request.coefficients))
        lower = np.asarray(request.lower, dtype=float)
        upper = np.asarray(request.upper, dtype=float)
        box = PriceBox(lower, upper, lower, upper)
        prices = maximize_revenue_boxed(theta, box, seed=request.seed)
        return schemas.OptimizeResponse(
            prices=prices.tolist(), revenue=eval_revenue(theta, prices)
        )

    @app.post("/bounds/quantile", response_model=schemas.BoundsResponse)
    def bounds_quantile(request: schemas.QuantileBoundsRequest):
        data = _dataset(request.dataset)
        box = quantile_bounds(data, _envelope(request.envelope, data.m), QuantileConfig(request.q))
        return _bounds_response(box)

    @app.post("/bounds/bootstrap", response_model=schemas.BoundsResponse)
    def bounds_bootstrap(request: schemas.BootstrapBoundsRequest):
        data = _dataset(request.dataset)
        box = bootstrap_bounds(
            data,
            _envelope(request.envelope, data.m),
            BootstrapConfig(request.n_bootstrap, request.kappa),
            seed=request.seed,
        )
        return _bounds_response(box)

    @app.post("/bounds/cross-validation", response_model=schemas.BoundsResponse)
    def bounds_cross_validation(request: schemas.CvBoundsRequest):
        data = _dataset(request.dataset)
        cfg = CvConfig(
            gamma=request.gamma,
            k_folds=request.k_folds,
            lambda1=request.lambda1,
            lambda2=request.lambda2,
            nm=NmConfig(max_evals=request.nm_max_evals),
        )
        box = cv_bounds_search(data, _envelope(request.envelope, data.m), cfg, seed=request.seed)
        return _bounds_response(box)

    @app.post("/synthetic", response_model=schemas.SyntheticResponse)
    def synthetic(request: schemas.SyntheticRequest):
        spec = SyntheticSpec(
            m=request.m,
            n=request.n,
            delta=request.delta,
            seed=request.seed,
            shared_noise=request.shared_noise,
        )
        theta_star, data = generate_dataset(spec)
        sigma = calibrate_noise_sigma(theta_star, data.prices, request.delta)
        return schemas.SyntheticResponse(
            coefficients=theta_star.entries.tolist(),
            prices=data.prices.tolist(),
            demands=data.demands.tolist(),
            sigma=sigma,
        )

    return app
