"""Sufficient-condition checks for uniform empirical convergence.

Every check reduces to a lag-covariance profile gamma(j). The two
normalized-variance conditions scan

    C1(q) = Var(S_q) / q^{(3-delta)/2},          q = 1..q_max,
    C2(q) = max_{m <= 2q+1} Var(S_m) / q^{3-delta},

with Var(S_m) = m gamma(0) + 2 sum_{j<m} (m-j) gamma(j) the exact variance
of a stationary partial sum. A finite scan cannot certify a supremum, so
verdicts are classified from the fitted log-log trend of the statistic over
the top half of the grid and carry an explicit indeterminate state.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import AssociationViolationError, InvalidInputError, InvalidParameterError
from .generators import StationaryModel, indicator_lag_covariance

BOUNDED_SLOPE = 0.05
DIVERGING_SLOPE = 0.2
CESARO_SLOPE = -0.2
CESARO_THRESHOLD = 0.05


# ---------------------------------------------------------------------------
# lag-covariance profiles


@dataclass(frozen=True)
class LagCovariance:
    """The map j -> Cov(g(X_1), g(X_{1+j})) for one observable g."""

    fn: Callable
    label: str = ""
    mode: str = "analytic"

    def __call__(self, j):
        return self.fn(j)

    def values(self, j_max: int) -> np.ndarray:
        """gamma(0..j_max) as a vector."""
        return np.asarray(self.fn(np.arange(j_max + 1)), dtype=float)

    @classmethod
    def from_sequence(cls, seq, label: str = "") -> "LagCovariance":
        arr = np.asarray(seq, dtype=float)

        def fn(j):
            js = np.atleast_1d(np.asarray(j, dtype=int))
            out = np.zeros(js.shape, dtype=float)
            inside = js < arr.size
            out[inside] = arr[js[inside]]
            return out.reshape(np.shape(j)) if np.ndim(j) else float(out[0])

        return cls(fn=fn, label=label)

    @classmethod
    def constant(cls, value: float, label: str = "") -> "LagCovariance":
        def fn(j):
            out = np.full(np.shape(j), float(value))
            return out if np.ndim(j) else float(value)

        return cls(fn=fn, label=label or f"constant({value:g})")

    @classmethod
    def from_model(cls, model: StationaryModel) -> "LagCovariance":
        if model.analytic_gamma is None:
            raise InvalidParameterError("model carries no analytic lag covariance")
        return cls(fn=model.analytic_gamma, label=model.model_id)

    @classmethod
    def indicator(cls, model: StationaryModel, x: float) -> "LagCovariance":
        """gamma_x(0) = F(x)(1 - F(x)), gamma_x(j) = H_x(j) for j >= 1."""
        f_x = float(model.marginal_cdf(x))
        g0 = f_x * (1.0 - f_x)

        def fn(j):
            js = np.atleast_1d(np.asarray(j, dtype=int))
            out = np.full(js.shape, g0, dtype=float)
            pos = js >= 1
            if np.any(pos):
                out[pos] = indicator_lag_covariance(model, x, js[pos])
            return out.reshape(np.shape(j)) if np.ndim(j) else float(out[0])

        return cls(fn=fn, label=f"{model.model_id}|1{{<={x:g}}}")


def _as_gamma(gamma) -> LagCovariance:
    if isinstance(gamma, LagCovariance):
        return gamma
    if callable(gamma):
        return LagCovariance(fn=gamma)
    return LagCovariance.from_sequence(gamma)


# ---------------------------------------------------------------------------
# parameters, trend fitting, reports


@dataclass(frozen=True)
class GcipParams:
    """delta in (0, 3) and the largest block index scanned."""

    delta: float = 1.0
    q_max: int = 1000

    def __post_init__(self):
        if not 0.0 < self.delta < 3.0:
            raise InvalidParameterError(f"delta={self.delta!r} must lie in (0, 3)")
        if self.q_max < 4:
            raise InvalidParameterError("q_max must be >= 4")

    @property
    def nu(self) -> float:
        """(1 - delta)/2, meaningful for delta in (0, 1)."""
        return (1.0 - self.delta) / 2.0


def log_log_slope(x, y, top_fraction: float = 0.5) -> Optional[float]:
    """Least-squares slope of log y against log x over the top of the grid.

    Zero or negative y values are excluded; returns None when fewer than two
    usable points remain (a flat-zero tail).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    start = int(len(x) * (1.0 - top_fraction))
    xs, ys = x[start:], y[start:]
    keep = ys > 0
    if keep.sum() < 2:
        return None
    lx, ly = np.log(xs[keep]), np.log(ys[keep])
    slope = np.polyfit(lx, ly, 1)[0]
    return float(slope)


def _classify(slope: Optional[float], bounded=BOUNDED_SLOPE, diverging=DIVERGING_SLOPE) -> str:
    if slope is None:  # identically-zero tail: nothing grows
        return "bounded"
    if slope <= bounded:
        return "bounded"
    if slope >= diverging:
        return "diverging"
    return "indeterminate"


@dataclass(frozen=True)
class ConditionReport:
    """Per-q statistic values with their running supremum, fitted trend and
    boundedness verdict."""

    condition_id: str
    q_grid: np.ndarray
    statistic: np.ndarray
    running_sup: float
    fitted_exponent: Optional[float]
    verdict: str
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "condition_id": self.condition_id,
            "params": self.params,
            "q_grid": [int(q) for q in self.q_grid],
            "statistic": [float(s) for s in self.statistic],
            "sup": float(self.running_sup),
            "slope": None if self.fitted_exponent is None else float(self.fitted_exponent),
            "verdict": self.verdict,
        }

    @property
    def qualified_id(self) -> str:
        tags = ",".join(
            f"{k}={v:g}" for k, v in self.params.items() if k in ("delta", "x")
        )
        return f"{self.condition_id}({tags})" if tags else self.condition_id

    def csv_rows(self):
        for q, s in zip(self.q_grid, self.statistic):
            yield f"{self.qualified_id},{int(q)},{s!r}"


def _make_report(condition_id, q_grid, statistic, params) -> ConditionReport:
    slope = log_log_slope(q_grid, statistic)
    return ConditionReport(
        condition_id=condition_id,
        q_grid=np.asarray(q_grid),
        statistic=np.asarray(statistic, dtype=float),
        running_sup=float(np.max(statistic)),
        fitted_exponent=slope,
        verdict=_classify(slope),
        params=params,
    )


# ---------------------------------------------------------------------------
# variance expansions and the two normalized-variance conditions


def variance_expansion(gamma, q: int) -> float:
    """Var(X_1 + ... + X_q) = q gamma(0) + 2 sum_{j=1}^{q-1} (q - j) gamma(j)."""
    if q < 1:
        raise InvalidParameterError("q must be >= 1")
    g = _as_gamma(gamma).values(q - 1)
    j = np.arange(1, q)
    return float(q * g[0] + 2.0 * np.sum((q - j) * g[1:q]))


def _variance_expansion_prefix(gvals: np.ndarray, m_max: int) -> np.ndarray:
    """Var(S_m) for m = 1..m_max from gamma(0..m_max-1), via cumulative sums."""
    g = gvals[:m_max]
    m = np.arange(1, m_max + 1, dtype=float)
    s = np.concatenate(([0.0], np.cumsum(g[1:])))          # sum_{j<=k} gamma(j)
    t = np.concatenate(([0.0], np.cumsum(np.arange(1, m_max) * g[1:])))
    return m * g[0] + 2.0 * (m * s - t)


def gcip_c1(gamma, params: GcipParams) -> ConditionReport:
    """First normalized-variance condition: Var(S_q) / q^{(3-delta)/2}."""
    g = _as_gamma(gamma)
    q = np.arange(1, params.q_max + 1)
    ve = _variance_expansion_prefix(g.values(params.q_max - 1), params.q_max)
    statistic = ve / q ** ((3.0 - params.delta) / 2.0)
    return _make_report(
        "gcip-c1", q, statistic, {"delta": params.delta, "q_max": params.q_max}
    )


def gcip_c2(gamma, params: GcipParams) -> ConditionReport:
    """Second condition on blocks between consecutive squares:
    max over block lengths m <= 2q+1 of Var(S_m) / q^{3-delta}.

    Stationarity makes the block start irrelevant, so the supremum over
    (k, j) collapses to a supremum over the block length.
    """
    g = _as_gamma(gamma)
    m_max = 2 * params.q_max + 1
    ve = _variance_expansion_prefix(g.values(m_max - 1), m_max)
    ve_prefix_max = np.maximum.accumulate(ve)
    q = np.arange(1, params.q_max + 1)
    statistic = ve_prefix_max[2 * q] / q ** (3.0 - params.delta)
    return _make_report(
        "gcip-c2", q, statistic, {"delta": params.delta, "q_max": params.q_max}
    )


@dataclass(frozen=True)
class IndicatorConditionScan:
    """gcip reports for the indicator class over a grid of thresholds."""

    x_grid: np.ndarray
    c1_reports: tuple
    c2_reports: tuple

    _RANK = {"bounded": 0, "indeterminate": 1, "diverging": 2}

    def _worst(self, reports) -> ConditionReport:
        return max(
            reports, key=lambda r: (self._RANK[r.verdict], r.running_sup)
        )

    @property
    def worst_c1(self) -> ConditionReport:
        return self._worst(self.c1_reports)

    @property
    def worst_c2(self) -> ConditionReport:
        return self._worst(self.c2_reports)


def gcep_indicator_conditions(
    model: StationaryModel, x_grid, params: GcipParams
) -> IndicatorConditionScan:
    """Run both conditions on the indicator observables 1{X <= x}, x in grid.

    gamma_x(0) = F(x)(1 - F(x)) (the diagonal term is included) and
    gamma_x(j) is the exact indicator lag covariance of the model.
    """
    x_grid = np.asarray(x_grid, dtype=float)
    c1, c2 = [], []
    for x in x_grid:
        gamma_x = LagCovariance.indicator(model, float(x))
        r1 = gcip_c1(gamma_x, params)
        r2 = gcip_c2(gamma_x, params)
        c1.append(_with_x(r1, "gcep-c1", x))
        c2.append(_with_x(r2, "gcep-c2", x))
    return IndicatorConditionScan(
        x_grid=x_grid, c1_reports=tuple(c1), c2_reports=tuple(c2)
    )


def _with_x(report: ConditionReport, condition_id: str, x: float) -> ConditionReport:
    params = dict(report.params)
    params["x"] = float(x)
    return ConditionReport(
        condition_id=condition_id,
        q_grid=report.q_grid,
        statistic=report.statistic,
        running_sup=report.running_sup,
        fitted_exponent=report.fitted_exponent,
        verdict=report.verdict,
        params=params,
    )


# ---------------------------------------------------------------------------
# association Cesaro conditions and the long-run variance


@dataclass(frozen=True)
class CesaroReport:
    """Running Cesaro averages a_q with the to-zero verdict."""

    condition_id: str
    q_grid: np.ndarray
    a: np.ndarray
    final: float
    fitted_exponent: Optional[float]
    verdict: str  # "to-zero" or "fails"
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "condition_id": self.condition_id,
            "params": self.params,
            "q_grid": [int(q) for q in self.q_grid],
            "statistic": [float(v) for v in self.a],
            "sup": float(np.max(self.a)) if self.a.size else 0.0,
            "slope": None if self.fitted_exponent is None else float(self.fitted_exponent),
            "verdict": self.verdict,
        }


def _cesaro_condition(
    gamma, q_max, power, condition_id, slope_max, threshold
) -> CesaroReport:
    if q_max < 2:
        raise InvalidParameterError("q_max must be >= 2")
    g = _as_gamma(gamma).values(q_max - 1)
    tail = g[1:]
    if np.any(tail < -1e-10):
        raise AssociationViolationError(
            "negative lag covariance: the sequence is not associated"
        )
    tail = np.clip(tail, 0.0, None)
    q = np.arange(2, q_max + 1)
    a = np.cumsum(tail**power)[: q_max - 1] / q
    slope = log_log_slope(q, a)
    final = float(a[-1])
    if np.all(a == 0.0):
        verdict = "to-zero"
    elif final < threshold and slope is not None and slope <= slope_max:
        verdict = "to-zero"
    else:
        verdict = "fails"
    return CesaroReport(
        condition_id=condition_id,
        q_grid=q,
        a=a,
        final=final,
        fitted_exponent=slope,
        verdict=verdict,
        params={"q_max": int(q_max), "power": power,
                "slope_max": slope_max, "threshold": threshold},
    )


def assoc_cesaro_cov13(
    gamma, q_max: int, slope_max: float = CESARO_SLOPE, threshold: float = CESARO_THRESHOLD
) -> CesaroReport:
    """a_q = (1/q) sum_{j=2}^{q} gamma(j-1)^{1/3}, the association condition
    with cube-root covariance weights."""
    return _cesaro_condition(gamma, q_max, 1.0 / 3.0, "cesaro-cov13", slope_max, threshold)


def assoc_cesaro_cov(
    gamma, q_max: int, slope_max: float = CESARO_SLOPE, threshold: float = CESARO_THRESHOLD
) -> CesaroReport:
    """a_q = (1/q) sum_{j=2}^{q} gamma(j-1), the plain covariance version."""
    return _cesaro_condition(gamma, q_max, 1.0, "cesaro-cov", slope_max, threshold)


@dataclass(frozen=True)
class LongRunVariance:
    """Truncated long-run variance gamma(0) + 2 sum gamma(j) with a fitted
    tail estimate; tail_flag marks profiles whose tail cannot be bounded."""

    value: float
    truncation: int
    tail_estimate: float
    tail_flag: bool

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "truncation": self.truncation,
            "tail_estimate": self.tail_estimate,
            "tail_flag": self.tail_flag,
        }


def long_run_variance(gamma, truncation: int) -> LongRunVariance:
    """sigma^2 = gamma(0) + 2 sum_{j=1}^{truncation} gamma(j), plus a
    power-law tail bound fitted to the decay of gamma."""
    if truncation < 0:
        raise InvalidParameterError("truncation must be >= 0")
    g = _as_gamma(gamma).values(truncation)
    value = float(g[0] + 2.0 * g[1:].sum())
    if truncation == 0 or np.all(g[max(1, truncation // 2):] == 0.0):
        return LongRunVariance(value, truncation, 0.0, False)
    j = np.arange(1, truncation + 1)
    slope = log_log_slope(j, np.abs(g[1:]))
    if slope is not None and slope < -1.05:
        # integral comparison for a ~ j^slope tail beyond the truncation
        tail = 2.0 * abs(g[truncation]) * truncation / (-slope - 1.0)
        return LongRunVariance(value, truncation, float(tail), False)
    return LongRunVariance(value, truncation, float("inf"), True)


# ---------------------------------------------------------------------------
# uniform-mixing decay condition


@dataclass(frozen=True)
class PhiDecayResult:
    """Fitted tail decay of a mixing profile against the required rate."""

    fitted_exponent: Optional[float]
    required_exponent: float
    eventually_zero: bool
    passed: bool
    delta: float

    def to_dict(self) -> dict:
        return {
            "slope": self.fitted_exponent,
            "required": self.required_exponent,
            "eventually_zero": self.eventually_zero,
            "passed": self.passed,
            "delta": self.delta,
        }


def phi_decay_check(phi_profile, delta: float) -> PhiDecayResult:
    """Check phi(r) = O(r^{-4/(1-delta)}) from a finite profile.

    The fitted log-log slope over the top half of the r range (zeros
    excluded) must reach -4/(1-delta) + 0.1, or the profile must vanish
    exactly from some point on.
    """
    if not 0.0 < delta < 1.0:
        raise InvalidParameterError(f"delta={delta!r} must lie in (0, 1)")
    prof = np.asarray(phi_profile, dtype=float)
    if prof.size < 2:
        raise InvalidInputError("profile needs at least two lags")
    if np.any(prof < -1e-15) or np.any(prof > 1.0 + 1e-12):
        raise InvalidInputError("phi values must lie in [0, 1]")
    if np.any(np.diff(prof) > 1e-12):
        raise InvalidInputError("phi profile must be nonincreasing")
    eventually_zero = prof[-1] == 0.0
    r = np.arange(1, prof.size + 1)
    slope = log_log_slope(r, prof)
    required = -4.0 / (1.0 - delta)
    passed = eventually_zero or (slope is not None and slope <= required + 0.1)
    return PhiDecayResult(
        fitted_exponent=slope,
        required_exponent=required,
        eventually_zero=bool(eventually_zero),
        passed=bool(passed),
        delta=float(delta),
    )


# ---------------------------------------------------------------------------
# elementary sequence lemmas (used as test oracles elsewhere)


def cesaro_mean(x) -> np.ndarray:
    """Running arithmetic means y_n = (x_1 + ... + x_n)/n."""
    arr = np.asarray(x, dtype=float)
    if arr.size == 0:
        raise InvalidInputError("cesaro mean of an empty sequence")
    return np.cumsum(arr) / np.arange(1, arr.size + 1)


def kronecker_weighted(b, x) -> np.ndarray:
    """z_n = (sum_{k<=n} b_k x_k) / b_n for positive nondecreasing weights."""
    bw = np.asarray(b, dtype=float)
    xs = np.asarray(x, dtype=float)
    if bw.shape != xs.shape or bw.size == 0:
        raise InvalidInputError("weights and sequence must share a nonempty shape")
    if np.any(bw <= 0) or np.any(np.diff(bw) < 0):
        raise InvalidInputError("weights must be positive and nondecreasing")
    return np.cumsum(bw * xs) / bw
