"""Pydantic request/response models for the bounds-estimation service."""

from __future__ import annotations

from pydantic import BaseModel, Field


class DatasetPayload(BaseModel):
    """Paired observations; prices and demands are n rows of m floats."""

    prices: list[list[float]]
    demands: list[list[float]]


class EnvelopePayload(BaseModel):
    """Feasibility limits; scalars broadcast to every item."""

    pmin: float | list[float] = 0.5
    pmax: float | list[float] = 1.1


class FitRequest(BaseModel):
    dataset: DatasetPayload


class FitResponse(BaseModel):
    coefficients: list[list[float]]  # (m+1) rows x m columns, intercepts first


class OptimizeRequest(BaseModel):
    coefficients: list[list[float]]
    lower: list[float]
    upper: list[float]
    seed: int = 0


class OptimizeResponse(BaseModel):
    prices: list[float]
    revenue: float


class BoundsResponse(BaseModel):
    alpha: list[float]
    beta: list[float]
    average_width: float


class QuantileBoundsRequest(BaseModel):
    dataset: DatasetPayload
    envelope: EnvelopePayload = EnvelopePayload()
    q: float = Field(gt=0.0, le=1.0)


class BootstrapBoundsRequest(BaseModel):
    dataset: DatasetPayload
    envelope: EnvelopePayload = EnvelopePayload()
    n_bootstrap: int = Field(100, ge=2)
    kappa: float = Field(1.645, ge=0.0)
    seed: int = 0


class CvBoundsRequest(BaseModel):
    dataset: DatasetPayload
    envelope: EnvelopePayload = EnvelopePayload()
    gamma: float = Field(ge=0.0)
    k_folds: int = Field(5, ge=2)
    lambda1: float = Field(1.0, ge=0.0)
    lambda2: float = Field(1.0, ge=0.0)
    nm_max_evals: int | None = None
    seed: int = 0


class SyntheticRequest(BaseModel):
    m: int = Field(ge=1)
    n: int = Field(ge=1)
    delta: float = Field(ge=0.0, lt=1.0)
    seed: int = 0
    shared_noise: bool = True


class SyntheticResponse(BaseModel):
    coefficients: list[list[float]]
    prices: list[list[float]]
    demands: list[list[float]]
    sigma: float


class HealthResponse(BaseModel):
    status: str
    version: str
