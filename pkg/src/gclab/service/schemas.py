"""Pydantic request/response models for the lab service."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

from ..montecarlo import DEFAULT_DELTA_GRID, DEFAULT_EPSILONS, DEFAULT_N_GRID


class ModelSpec(BaseModel):
    """One stationary model; kind-specific keys mirror the config schema."""

    model_config = ConfigDict(extra="forbid")

    kind: Literal["iid-uniform", "constant", "gaussian-ar1", "moving-average", "markov-chain"]
    rho: Optional[float] = None
    coeffs: Optional[list[float]] = None
    innovation_sd: float = 1.0
    transition: Optional[list[list[float]]] = None
    values: Optional[list[float]] = None


class SimulateRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    model: ModelSpec
    n_grid: list[int] = Field(default_factory=lambda: list(DEFAULT_N_GRID))
    reps: int = 200
    seed: int = 0
    threads: int = 1


class SlopeFitOut(BaseModel):
    slope: float
    intercept: float
    r_squared: float
    points_used: int


class SimulateResponse(BaseModel):
    model_config = ConfigDict(protected_namespaces=())

    model_id: str
    n_grid: list[int]
    mean: list[float]
    median: list[float]
    q90: list[float]
    reps: int
    seed: int
    slope: Optional[SlopeFitOut] = None


class ConditionsRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    model: ModelSpec
    delta_grid: list[float] = Field(default_factory=lambda: list(DEFAULT_DELTA_GRID))
    q_max: int = 1000
    x_quantiles: int = 21
    r_max: int = 256
    truncation: int = 512


class ConditionReportOut(BaseModel):
    condition_id: str
    params: dict
    q_grid: list[int]
    statistic: list[float]
    sup: float
    slope: Optional[float]
    verdict: str


class GcepOut(BaseModel):
    worst_c1: Optional[ConditionReportOut]
    worst_c2: Optional[ConditionReportOut]
    per_x: list[dict]


class LongRunVarianceOut(BaseModel):
    value: float
    truncation: int
    tail_estimate: float
    tail_flag: bool


class PhiDecayOut(BaseModel):
    slope: Optional[float]
    required: float
    eventually_zero: bool
    passed: bool
    delta: float


class PhiOut(BaseModel):
    profile: Optional[list[float]]
    checks: list[PhiDecayOut]


class ConditionsResponse(BaseModel):
    model_config = ConfigDict(protected_namespaces=())

    model_id: str
    gcip_satisfied: bool
    gcip: list[ConditionReportOut]
    gcep: GcepOut
    cesaro_cov13: Optional[ConditionReportOut]
    cesaro_cov: Optional[ConditionReportOut]
    long_run_variance: LongRunVarianceOut
    phi: PhiOut


class EntropyRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    marginal: Literal["uniform", "normal"] = "uniform"
    epsilons: list[float] = Field(default_factory=lambda: list(DEFAULT_EPSILONS))
    bound_k: float = 1.0
    bound_r: float = 2.0
    probe_budget: int = 32


class EntropyReportOut(BaseModel):
    family: str
    epsilon: float
    norm: str
    bracket_count: int
    vc_index: Optional[int]
    bound_params: Optional[dict]
    bound_value: Optional[float]


class VcIndexOut(BaseModel):
    index: Optional[int]
    largest_shattered: int
    smallest_unshattered: Optional[int]
    indeterminate: bool
    configs_probed: int


class EntropyResponse(BaseModel):
    marginal: str
    reports: list[EntropyReportOut]
    half_lines: VcIndexOut
    intervals: VcIndexOut


class InequalitiesRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    model: ModelSpec
    seed: int = 0
    mc_samples: int = 200_000


class VerdictOut(BaseModel):
    inequality_id: str
    inputs: dict
    lhs: float
    rhs: float
    margin: float
    stderr: Optional[float]
    holds: bool
    mode: str


class InequalitiesResponse(BaseModel):
    model_config = ConfigDict(protected_namespaces=())

    model_id: str
    verdicts: list[VerdictOut]


class HealthResponse(BaseModel):
    status: str
    version: str
