"""Request and response models of the HTTP API."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field, model_validator

StrategyKind = Literal["unif", "unifi", "adapti", "unifi-iid"]
BPolicy = Literal["min", "max", "mean"]


class StrategyModel(BaseModel):
    kind: StrategyKind = "unif"
    budget: int = Field(default=1000, ge=1)
    sigma: float = Field(default=1.0, gt=0.0)
    rng_seed: int = Field(default=0, ge=0)
    max_rejection_factor: int = Field(default=100, ge=1)
    workers: int = Field(default=1, ge=1)


class DriverModel(BaseModel):
    theta: float = Field(default=0.75, gt=0.0, lt=1.0)
    max_regions: int = Field(default=10, ge=1)
    initial_lb: float = Field(default=0.0, ge=0.0)
    initial_ub: float = Field(default=1.0, gt=0.0)
    b_policy: BPolicy = "min"
    exit_gap_factor: float = Field(default=0.1, gt=0.0)

    @model_validator(mode="after")
    def _check_interval(self) -> "DriverModel":
        if not (self.initial_lb < self.initial_ub):
            raise ValueError("initial_lb must be below initial_ub")
        return self


class BlackBoxModel(BaseModel):
    """Where fidelity queries go: a built-in model or a child process.

    ``command`` (a shell-style string) wins over ``builtin`` when both
    are set. ``slope`` only applies to the built-in model.
    """

    dim: int = Field(ge=1)
    builtin: Literal["pwl"] = "pwl"
    slope: float = Field(default=0.75, gt=0.0, lt=1.0)
    command: Optional[str] = None
    timeout: Optional[float] = Field(default=None, gt=0.0)


class ExplanationModel(BaseModel):
    alpha: list[float] = Field(min_length=1)
    intercept: float = 0.0


class CertifyRequest(BaseModel):
    blackbox: BlackBoxModel
    x0: Optional[list[float]] = None
    explanation: Optional[ExplanationModel] = None
    strategy: StrategyModel = Field(default_factory=StrategyModel)
    driver: DriverModel = Field(default_factory=DriverModel)
    repeat: int = Field(default=1, ge=1)


class CertifyResponse(BaseModel):
    schema_version: int
    runs: list[dict]
    summary: dict
    meta: dict


class BoundsRequest(CertifyRequest):
    epsilon: float = Field(default=0.01, gt=0.0)
    proxy: Literal["theta", "fhat"] = "theta"
    kappa: Optional[float] = Field(default=None, gt=0.0)
    evt: bool = False


class RunBounds(BaseModel):
    run: int
    w: float
    exp_bound: float
    eval_point: float
    regions: list[dict]
    evt_bound: Optional[float] = None


class BoundsResponse(BaseModel):
    schema_version: int
    epsilon: float
    proxy: str
    kappa: Optional[float] = None
    runs: list[RunBounds]
    summary: dict
    meta: dict


class BenchRequest(BaseModel):
    dims: list[int] = Field(min_length=1)
    budgets: list[int] = Field(min_length=1)
    strategies: list[StrategyKind] = Field(min_length=1)
    seeds: list[int] = Field(default_factory=lambda: list(range(10)), min_length=1)
    theta: float = Field(default=0.75, gt=0.0, lt=1.0)
    slope: float = Field(default=0.75, gt=0.0, lt=1.0)
    max_regions: int = Field(default=10, ge=1)
    b_policy: BPolicy = "min"
    workers: int = Field(default=1, ge=1)


class BenchResponse(BaseModel):
    rows: list[dict]
    meta: dict


class ClusterSpec(BaseModel):
    clusters: int = Field(default=5, ge=1)
    per_cluster: int = Field(default=8, ge=1)
    dim: int = Field(default=5, ge=1)
    spread: float = Field(default=0.01, ge=0.0)
    center_scale: float = Field(default=0.1, ge=0.0)
    seed: int = Field(default=0, ge=0)


class CoverageRequest(BaseModel):
    blackbox: BlackBoxModel
    samples: Optional[list[list[float]]] = None
    clusters: Optional[ClusterSpec] = None
    explanation: Optional[ExplanationModel] = None
    strategy: StrategyModel = Field(default_factory=StrategyModel)
    theta: float = Field(default=0.75, gt=0.0, lt=1.0)
    max_regions: int = Field(default=10, ge=1)
    b_policy: BPolicy = "min"
    top_fraction: float = Field(default=0.6, gt=0.0, le=1.0)
    expl_cost: float = Field(default=5000.0, gt=0.0)

    @model_validator(mode="after")
    def _one_source(self) -> "CoverageRequest":
        if (self.samples is None) == (self.clusters is None):
            raise ValueError("provide exactly one of samples or clusters")
        return self


class CoveragePickModel(BaseModel):
    index: int
    w: float
    queries: int
    covered: list[int]


class CoverageResponse(BaseModel):
    picks: list[CoveragePickModel]
    excluded: list[int]
    n_effective: int
    total_cert_queries: int
    savings: float
    covered_fid_mean: Optional[float] = None
    covered_fid_std: Optional[float] = None
    meta: dict


class StabilityRequest(BaseModel):
    pairs: list[tuple[list[float], list[float]]] = Field(min_length=1)
    k: int = Field(ge=1)


class StabilityResponse(BaseModel):
    n_pairs: int
    k: int
    topk_mean: float
    topk_median: float
    topk_se_mean: float
    topk_se_median: float
    spearman_mean: float
    spearman_median: float
    spearman_se_mean: float
    spearman_se_median: float
    meta: dict


class HealthResponse(BaseModel):
    status: Literal["ok"]
    version: str
