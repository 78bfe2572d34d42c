"""FastAPI front end: each endpoint wraps one lab operation statelessly.

All computation is deterministic in the request payload, so responses are
reproducible byte for byte; the CLI is a thin client of these endpoints.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException
from scipy.stats import norm

from .. import __version__
from ..config import ConfigError
from ..entropy import closed_intervals, half_lines, halfline_entropy_report, vc_index
from ..errors import (
    AssociationViolationError,
    CapacityError,
    InvalidInputError,
    InvalidParameterError,
    NotApplicableError,
)
from ..inequalities import inequality_battery
from ..montecarlo import (
    ExperimentSpec,
    build_model,
    fit_decay_slope,
    run_condition_suite,
    run_convergence_study,
)
from . import schemas

_CLIENT_ERRORS = (
    InvalidParameterError,
    InvalidInputError,
    CapacityError,
    AssociationViolationError,
    NotApplicableError,
    ConfigError,
)

app = FastAPI(title="gclab", version=__version__)


def _spec_from(model: schemas.ModelSpec, **extra) -> ExperimentSpec:
    return ExperimentSpec(
        kind=model.kind,
        rho=model.rho,
        coeffs=None if model.coeffs is None else tuple(model.coeffs),
        innovation_sd=model.innovation_sd,
        transition=None if model.transition is None else tuple(map(tuple, model.transition)),
        values=None if model.values is None else tuple(model.values),
        **extra,
    )


@app.get("/health", response_model=schemas.HealthResponse)
def health() -> schemas.HealthResponse:
    return schemas.HealthResponse(status="ok", version=__version__)


@app.post("/simulate", response_model=schemas.SimulateResponse)
def simulate(req: schemas.SimulateRequest) -> schemas.SimulateResponse:
    try:
        spec = _spec_from(req.model, n_grid=tuple(req.n_grid), reps=req.reps, seed=req.seed)
        model = build_model(spec)
        path = run_convergence_study(spec, threads=req.threads)
        slope = None
        if sum(m > 0 for m in path.mean) >= 3:
            slope = schemas.SlopeFitOut(**fit_decay_slope(path).to_dict())
    except _CLIENT_ERRORS as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    return schemas.SimulateResponse(model_id=model.model_id, slope=slope, **path.to_dict())


@app.post("/conditions", response_model=schemas.ConditionsResponse)
def conditions(req: schemas.ConditionsRequest) -> schemas.ConditionsResponse:
    try:
        spec = _spec_from(
            req.model,
            delta_grid=tuple(req.delta_grid),
            q_max=req.q_max,
            x_quantiles=req.x_quantiles,
            r_max=req.r_max,
            truncation=req.truncation,
        )
        result = run_condition_suite(spec)
    except _CLIENT_ERRORS as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    payload = result.to_dict()
    return schemas.ConditionsResponse(
        model_id=payload["model_id"],
        gcip_satisfied=payload["gcip_satisfied"],
        gcip=payload["gcip"],
        gcep=payload["gcep"],
        cesaro_cov13=payload["cesaro_cov13"],
        cesaro_cov=payload["cesaro_cov"],
        long_run_variance=payload["long_run_variance"],
        phi=payload["phi"],
    )


@app.post("/entropy", response_model=schemas.EntropyResponse)
def entropy(req: schemas.EntropyRequest) -> schemas.EntropyResponse:
    if req.marginal == "uniform":
        cdf = lambda x: min(max(float(x), 0.0), 1.0)  # noqa: E731
        quantile = lambda p: p  # noqa: E731
    else:
        cdf, quantile = norm.cdf, norm.ppf
    try:
        reports = [
            halfline_entropy_report(
                cdf,
                eps,
                quantile=quantile,
                K=req.bound_k,
                r=req.bound_r,
                probe_budget=req.probe_budget,
            ).to_dict()
            for eps in req.epsilons
        ]
        hl = vc_index(half_lines(), probe_budget=req.probe_budget).to_dict()
        iv = vc_index(closed_intervals(), probe_budget=req.probe_budget).to_dict()
    except _CLIENT_ERRORS as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    return schemas.EntropyResponse(
        marginal=req.marginal, reports=reports, half_lines=hl, intervals=iv
    )


@app.post("/inequalities", response_model=schemas.InequalitiesResponse)
def inequalities(req: schemas.InequalitiesRequest) -> schemas.InequalitiesResponse:
    try:
        model = build_model(_spec_from(req.model))
        verdicts = inequality_battery(model, seed=req.seed, mc_samples=req.mc_samples)
    except _CLIENT_ERRORS as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    return schemas.InequalitiesResponse(
        model_id=model.model_id, verdicts=[v.to_dict() for v in verdicts]
    )
