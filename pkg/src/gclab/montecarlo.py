"""Replication harness: convergence studies and condition-suite scans.

An ExperimentSpec bundles one model with every grid the lab scans. All
randomness flows from the master seed through per-replicate counter-based
streams, so reruns and different worker counts give identical bytes.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import conditions, generators
from .conditions import (
    ConditionReport,
    GcipParams,
    LagCovariance,
    assoc_cesaro_cov,
    assoc_cesaro_cov13,
    gcep_indicator_conditions,
    gcip_c1,
    gcip_c2,
    long_run_variance,
    phi_decay_check,
)
from .empirical import DeviationPath, run_gc_diagnostic
from .errors import InvalidInputError, InvalidParameterError

DEFAULT_N_GRID = tuple(2**k for k in range(6, 15))
DEFAULT_DELTA_GRID = (0.5, 1.0, 1.5, 2.0, 2.5)
DEFAULT_EPSILONS = (0.5, 0.1, 0.01)
ASSOCIATED_KINDS = ("iid", "constant", "gaussian-ar1", "moving-average")


@dataclass(frozen=True)
class ExperimentSpec:
    """One model plus the grids, budgets and seed of a full lab run."""

    kind: str = "iid-uniform"
    rho: Optional[float] = None
    coeffs: Optional[tuple] = None
    innovation_sd: float = 1.0
    transition: Optional[tuple] = None
    values: Optional[tuple] = None
    n_grid: tuple = DEFAULT_N_GRID
    reps: int = 200
    seed: int = 0
    q_max: int = 1000
    delta_grid: tuple = DEFAULT_DELTA_GRID
    x_quantiles: int = 21
    r_max: int = 256
    truncation: int = 512
    epsilons: tuple = DEFAULT_EPSILONS
    bound_k: float = 1.0
    bound_r: float = 2.0
    probe_budget: int = 32
    output_dir: str = "out"

    def with_seed(self, seed: int) -> "ExperimentSpec":
        return replace(self, seed=int(seed))


def build_model(spec: ExperimentSpec) -> generators.StationaryModel:
    """Instantiate the stationary model an ExperimentSpec describes."""
    if spec.kind == "iid-uniform":
        return generators.make_iid_uniform()
    if spec.kind == "constant":
        return generators.make_constant_uniform()
    if spec.kind == "gaussian-ar1":
        if spec.rho is None:
            raise InvalidParameterError("gaussian-ar1 requires rho")
        return generators.make_gaussian_ar1(spec.rho)
    if spec.kind == "moving-average":
        if not spec.coeffs:
            raise InvalidParameterError("moving-average requires coeffs")
        return generators.make_moving_average(spec.coeffs, spec.innovation_sd)
    if spec.kind == "markov-chain":
        if spec.transition is None or spec.values is None:
            raise InvalidParameterError("markov-chain requires transition and values")
        chain = generators.MarkovChainSpec.make(
            np.asarray(spec.transition, dtype=float), np.asarray(spec.values, dtype=float)
        )
        return generators.make_markov_chain(chain)
    raise InvalidParameterError(f"unknown model kind {spec.kind!r}")


def x_grid_for(model: generators.StationaryModel, count: int) -> np.ndarray:
    """Marginal quantiles at `count` levels from 0.025 to 0.975, deduplicated
    (step marginals collapse several levels onto one state value)."""
    levels = np.linspace(0.025, 0.975, count)
    return np.unique(np.asarray(model.marginal_quantile(levels), dtype=float))


# ---------------------------------------------------------------------------
# convergence studies


@dataclass(frozen=True)
class SlopeFit:
    """Least-squares power-law fit of mean deviation against sample size."""

    slope: float
    intercept: float
    r_squared: float
    points_used: int

    def to_dict(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "points_used": self.points_used,
        }


def fit_decay_slope(path: DeviationPath) -> SlopeFit:
    """Fit log(mean deviation) = intercept + slope * log(n)."""
    means = np.asarray(path.mean, dtype=float)
    ns = np.asarray(path.n_grid, dtype=float)
    keep = means > 0
    if keep.sum() < 3:
        raise InvalidInputError("need at least 3 grid points with positive means")
    lx, ly = np.log(ns[keep]), np.log(means[keep])
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - float(np.sum(resid**2)) / ss_tot
    return SlopeFit(
        slope=float(slope),
        intercept=float(intercept),
        r_squared=r2,
        points_used=int(keep.sum()),
    )


def run_convergence_study(
    spec: ExperimentSpec, threads: int = 1, out_csv=None
) -> DeviationPath:
    """Sup-deviation statistics of the spec's model over its n grid.

    Replicates are merged by index so output is identical for every thread
    count; when out_csv is given the canonical CSV is written there.
    """
    model = build_model(spec)
    path = run_gc_diagnostic(
        model, spec.n_grid, reps=spec.reps, seed=spec.seed, threads=threads
    )
    if out_csv is not None:
        try:
            with open(out_csv, "w") as fh:
                fh.write(path.to_csv_text())
        except OSError as exc:
            raise RuntimeError(f"could not write deviation CSV to {out_csv}: {exc}") from exc
    return path


# ---------------------------------------------------------------------------
# condition suite


@dataclass(frozen=True)
class ConditionSuiteResult:
    """Every applicable condition verdict for one model, JSON-ready."""

    model_id: str
    gcip_reports: tuple  # ConditionReport, identity observable, per delta
    gcep_worst_c1: Optional[ConditionReport]
    gcep_worst_c2: Optional[ConditionReport]
    gcep_per_x: tuple  # compact {x, verdict, sup} summaries
    cesaro13: Optional[conditions.CesaroReport]
    cesaro: Optional[conditions.CesaroReport]
    sigma2: conditions.LongRunVariance
    phi_profile: Optional[list]
    phi_checks: tuple

    @property
    def gcip_satisfied(self) -> bool:
        """The variance conditions each quantify over "some delta", so the
        pair is satisfied when any scanned delta bounds C1 and any bounds C2
        (iid data, for instance, needs delta <= 1 for C1)."""
        c1 = [r for r in self.gcip_reports if r.condition_id == "gcip-c1"]
        c2 = [r for r in self.gcip_reports if r.condition_id == "gcip-c2"]
        return any(r.verdict == "bounded" for r in c1) and any(
            r.verdict == "bounded" for r in c2
        )

    def to_dict(self) -> dict:
        return {
            "model_id": self.model_id,
            "gcip_satisfied": self.gcip_satisfied,
            "gcip": [r.to_dict() for r in self.gcip_reports],
            "gcep": {
                "worst_c1": None if self.gcep_worst_c1 is None else self.gcep_worst_c1.to_dict(),
                "worst_c2": None if self.gcep_worst_c2 is None else self.gcep_worst_c2.to_dict(),
                "per_x": list(self.gcep_per_x),
            },
            "cesaro_cov13": None if self.cesaro13 is None else self.cesaro13.to_dict(),
            "cesaro_cov": None if self.cesaro is None else self.cesaro.to_dict(),
            "long_run_variance": self.sigma2.to_dict(),
            "phi": {
                "profile": self.phi_profile,
                "checks": [c.to_dict() for c in self.phi_checks],
            },
        }

    def all_reports(self) -> list:
        out = list(self.gcip_reports)
        if self.gcep_worst_c1 is not None:
            out.append(self.gcep_worst_c1)
        if self.gcep_worst_c2 is not None:
            out.append(self.gcep_worst_c2)
        return out


def run_condition_suite(spec: ExperimentSpec) -> ConditionSuiteResult:
    """Evaluate every condition the model supports.

    Identity-observable variance conditions run for each delta in the grid;
    indicator conditions run at delta = 1 across the marginal-quantile grid;
    Cesaro conditions run for associated families, the mixing-decay check
    for finite chains. Everything here is analytic, so the result does not
    depend on the seed.
    """
    model = build_model(spec)
    gamma = LagCovariance.from_model(model)

    gcip_reports = []
    for delta in spec.delta_grid:
        params = GcipParams(delta=delta, q_max=spec.q_max)
        for report in (gcip_c1(gamma, params), gcip_c2(gamma, params)):
            gcip_reports.append(report)

    xs = x_grid_for(model, spec.x_quantiles)
    scan = gcep_indicator_conditions(model, xs, GcipParams(delta=1.0, q_max=spec.q_max))
    per_x = tuple(
        {
            "x": float(x),
            "c1_verdict": r1.verdict,
            "c2_verdict": r2.verdict,
            "c1_sup": r1.running_sup,
            "c2_sup": r2.running_sup,
        }
        for x, r1, r2 in zip(scan.x_grid, scan.c1_reports, scan.c2_reports)
    )

    cesaro13 = cesaro = None
    if model.kind in ASSOCIATED_KINDS:
        cesaro13 = assoc_cesaro_cov13(gamma, spec.q_max)
        cesaro = assoc_cesaro_cov(gamma, spec.q_max)

    sigma2 = long_run_variance(
        LagCovariance(fn=generators.transformed_gamma(model), label="F(X)"),
        spec.truncation,
    )

    phi_profile = None
    phi_checks = ()
    if model.kind == "markov-chain":
        profile = generators.phi_mixing_profile(model.chain, spec.r_max)
        phi_profile = [float(v) for v in profile]
        deltas = [d for d in spec.delta_grid if 0.0 < d < 1.0] or [0.5]
        phi_checks = tuple(phi_decay_check(profile, d) for d in deltas)

    return ConditionSuiteResult(
        model_id=model.model_id,
        gcip_reports=tuple(gcip_reports),
        gcep_worst_c1=scan.worst_c1,
        gcep_worst_c2=scan.worst_c2,
        gcep_per_x=per_x,
        cesaro13=cesaro13,
        cesaro=cesaro,
        sigma2=sigma2,
        phi_profile=phi_profile,
        phi_checks=phi_checks,
    )
