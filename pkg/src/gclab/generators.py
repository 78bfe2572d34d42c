"""Stationary sequence models with known dependence structure.

Four families are bundled, each with an exact marginal cdf and an analytic
lag-covariance map:

* ``iid-uniform``      independent Uniform(0,1) draws,
* ``gaussian-ar1``     X_{i+1} = rho X_i + sqrt(1-rho^2) eps, standard normal
                       marginal, gamma(j) = rho^j (associated for rho >= 0),
* ``moving-average``   X_i = sum_k a_k eps_{i-k} with a_k >= 0 and Gaussian
                       innovations (associated, m-dependent),
* ``markov-chain``     finite-state stationary chain, the uniform-mixing
                       family; mixing coefficients are exact matrix-power
                       total-variation distances,
* ``constant``         a single uniform draw repeated (perfect dependence,
                       the standard counterexample).

Sampling is deterministic in (model, n, seed) and identical across worker
counts: every replicate column is computed from its own counter-based
stream, and all path recursions act columnwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.signal import lfilter
from scipy.stats import norm

from .bvn import bvn_indicator_cov
from .errors import InvalidParameterError
from .rngs import stream

_EIG_ONE_TOL = 1e-8


# ---------------------------------------------------------------------------
# specs and model container


@dataclass(frozen=True)
class MarkovChainSpec:
    """Finite-state chain: row-stochastic transition matrix, a real value per
    state, and the (unique) stationary law."""

    transition: np.ndarray
    values: np.ndarray
    stationary: np.ndarray

    @classmethod
    def make(cls, transition, values) -> "MarkovChainSpec":
        P = np.asarray(transition, dtype=float)
        v = np.asarray(values, dtype=float)
        if P.ndim != 2 or P.shape[0] != P.shape[1]:
            raise InvalidParameterError("transition must be a square matrix")
        if v.shape != (P.shape[0],):
            raise InvalidParameterError("values must supply one real per state")
        if np.any(P < 0):
            raise InvalidParameterError("transition entries must be nonnegative")
        if np.any(np.abs(P.sum(axis=1) - 1.0) > 1e-12):
            raise InvalidParameterError("transition rows must sum to 1 within 1e-12")
        pi = stationary_distribution(P)
        return cls(transition=P, values=v, stationary=pi)

    def __post_init__(self):
        object.__setattr__(self, "transition", np.asarray(self.transition, float))
        object.__setattr__(self, "values", np.asarray(self.values, float))
        object.__setattr__(self, "stationary", np.asarray(self.stationary, float))
        pi, P = self.stationary, self.transition
        if np.any(pi < -1e-12) or abs(pi.sum() - 1.0) > 1e-10:
            raise InvalidParameterError("stationary vector must be a probability law")
        if np.max(np.abs(pi @ P - pi)) > 1e-10:
            raise InvalidParameterError("stationary vector must satisfy pi P = pi")

    @property
    def n_states(self) -> int:
        return self.transition.shape[0]


def stationary_distribution(P: np.ndarray) -> np.ndarray:
    """Unique stationary law of a row-stochastic matrix, or raise.

    Uniqueness is certified by the eigenvalue 1 of P having algebraic
    multiplicity 1 (one recurrent class); pi solves pi P = pi, sum pi = 1.
    """
    eigvals = np.linalg.eigvals(P)
    if np.sum(np.abs(eigvals - 1.0) < _EIG_ONE_TOL) != 1:
        raise InvalidParameterError(
            "chain has no unique stationary law (reducible or periodic structure)"
        )
    n = P.shape[0]
    A = np.vstack([P.T - np.eye(n), np.ones((1, n))])
    b = np.zeros(n + 1)
    b[-1] = 1.0
    pi, *_ = np.linalg.lstsq(A, b, rcond=None)
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


@dataclass(frozen=True, eq=False)
class StationaryModel:
    """A stationary sequence model: sampler plus exact marginal and covariance
    structure. Immutable; safe to share across workers."""

    kind: str
    params: dict
    marginal_cdf: Callable[[np.ndarray], np.ndarray]
    marginal_quantile: Optional[Callable[[np.ndarray], np.ndarray]]
    analytic_gamma: Optional[Callable[[np.ndarray], np.ndarray]]
    model_id: str
    block_sampler: Callable[[int, list], np.ndarray] = field(repr=False)
    chain: Optional[MarkovChainSpec] = None


@dataclass(frozen=True)
class SamplePath:
    """One sampled path plus the provenance needed to regenerate it."""

    values: np.ndarray
    seed: object
    model_id: str

    def __len__(self) -> int:
        return len(self.values)

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("value\n")
            for v in self.values:
                fh.write(f"{float(v)!r}\n")


@dataclass(frozen=True)
class CovarianceEstimate:
    """Lag covariance with its provenance: exact value or MC estimate."""

    value: float
    stderr: Optional[float]
    mode: str  # "analytic" or "monte-carlo"


# ---------------------------------------------------------------------------
# constructors


def make_iid_uniform() -> StationaryModel:
    """Independent Uniform(0,1) sequence."""

    def gamma(j):
        out = np.where(np.asarray(j) == 0, 1.0 / 12.0, 0.0)
        return out if np.ndim(j) else float(out)

    def sampler(n, gens):
        return np.column_stack([g.random(n) for g in gens])

    return StationaryModel(
        kind="iid",
        params={},
        marginal_cdf=_uniform_cdf,
        marginal_quantile=lambda p: np.asarray(p, dtype=float),
        analytic_gamma=gamma,
        model_id="iid-uniform",
        block_sampler=sampler,
    )


def make_constant_uniform() -> StationaryModel:
    """Perfectly dependent sequence: one Uniform(0,1) draw repeated.

    gamma(j) = Var(X) = 1/12 at every lag; the ergodic average never
    converges, which makes this the bundled counterexample.
    """

    def gamma(j):
        out = np.full(np.shape(j), 1.0 / 12.0)
        return out if np.ndim(j) else 1.0 / 12.0

    def sampler(n, gens):
        return np.column_stack([np.full(n, g.random()) for g in gens])

    return StationaryModel(
        kind="constant",
        params={},
        marginal_cdf=_uniform_cdf,
        marginal_quantile=lambda p: np.asarray(p, dtype=float),
        analytic_gamma=gamma,
        model_id="constant-uniform",
        block_sampler=sampler,
    )


def make_gaussian_ar1(rho: float) -> StationaryModel:
    """Gaussian AR(1) with standard normal marginal and gamma(j) = rho^j.

    rho in [0, 1): nonnegative correlation keeps the sequence associated,
    rho = 1 is the nonstationary boundary. The initial state is drawn from
    the exact stationary marginal, so no burn-in is needed.
    """
    if not 0.0 <= rho < 1.0:
        raise InvalidParameterError(
            f"rho={rho!r}: gaussian-ar1 requires rho in [0, 1) (association)"
        )
    rho = float(rho)
    innov_scale = np.sqrt(1.0 - rho * rho)

    def gamma(j):
        out = rho ** np.asarray(j, dtype=float)
        return out if np.ndim(j) else float(out)

    def sampler(n, gens):
        draws = np.column_stack([g.standard_normal(n) for g in gens])
        driven = np.empty_like(draws)
        driven[0] = draws[0]                      # exact stationary start
        driven[1:] = innov_scale * draws[1:]
        return lfilter([1.0], [1.0, -rho], driven, axis=0)

    return StationaryModel(
        kind="gaussian-ar1",
        params={"rho": rho},
        marginal_cdf=norm.cdf,
        marginal_quantile=norm.ppf,
        analytic_gamma=gamma,
        model_id=f"gaussian-ar1(rho={rho:g})",
        block_sampler=sampler,
    )


def make_moving_average(coeffs, innovation_sd: float = 1.0) -> StationaryModel:
    """Moving average X_i = sum_k a_k eps_{i-k} of iid N(0, sd^2) innovations.

    All a_k >= 0 (association), at least one positive. gamma(j) =
    sd^2 sum_k a_k a_{k+j}, zero beyond the coefficient span (m-dependence).
    """
    a = np.asarray(coeffs, dtype=float)
    if a.ndim != 1 or a.size == 0:
        raise InvalidParameterError("coeffs must be a nonempty 1-d sequence")
    if np.any(a < 0):
        raise InvalidParameterError(
            f"coeffs={list(a)!r}: moving-average requires nonnegative "
            "coefficients (association)"
        )
    if not np.any(a > 0):
        raise InvalidParameterError("at least one coefficient must be positive")
    if not innovation_sd > 0:
        raise InvalidParameterError("innovation_sd must be positive")
    sd = float(innovation_sd)
    m = a.size - 1
    acf = sd * sd * np.correlate(a, a, mode="full")[m:]  # gamma(0..m)
    sigma_x = float(np.sqrt(acf[0]))

    def gamma(j):
        js = np.atleast_1d(np.asarray(j, dtype=int))
        out = np.zeros(js.shape, dtype=float)
        inside = js <= m
        out[inside] = acf[js[inside]]
        return out.reshape(np.shape(j)) if np.ndim(j) else float(out[0])

    def sampler(n, gens):
        eps = np.column_stack([g.standard_normal(n + m) for g in gens]) * sd
        return lfilter(a, [1.0], eps, axis=0)[m:]  # burn-in of m innovations

    return StationaryModel(
        kind="moving-average",
        params={"coeffs": tuple(float(c) for c in a), "innovation_sd": sd},
        marginal_cdf=lambda x: norm.cdf(np.asarray(x, float) / sigma_x),
        marginal_quantile=lambda p: sigma_x * norm.ppf(p),
        analytic_gamma=gamma,
        model_id=f"moving-average({list(map(float, a))},sd={sd:g})",
        block_sampler=sampler,
    )


def make_markov_chain(spec: MarkovChainSpec) -> StationaryModel:
    """Stationary finite-state chain started from its stationary law."""
    P, v, pi = spec.transition, spec.values, spec.stationary
    order = np.argsort(v, kind="stable")
    v_sorted = v[order]
    pi_cum = np.cumsum(pi[order])
    cum_rows = np.cumsum(P, axis=1)
    cum_rows[:, -1] = 1.0  # guard against cumsum roundoff at the top
    cum_pi = np.cumsum(pi)
    cum_pi[-1] = 1.0

    def cdf(x):
        idx = np.searchsorted(v_sorted, np.asarray(x, dtype=float), side="right")
        out = np.where(idx > 0, pi_cum[np.maximum(idx - 1, 0)], 0.0)
        return out if np.ndim(x) else float(out)

    def quantile(p):
        idx = np.searchsorted(pi_cum, np.asarray(p, dtype=float), side="left")
        out = v_sorted[np.minimum(idx, len(v_sorted) - 1)]
        return out if np.ndim(p) else float(out)

    gamma = _chain_observable_gamma(spec, v)

    def sampler(n, gens):
        u = np.column_stack([g.random(n) for g in gens])
        states = np.empty((n, len(gens)), dtype=np.intp)
        states[0] = np.searchsorted(cum_pi, u[0], side="right")
        for t in range(1, n):
            states[t] = (cum_rows[states[t - 1]] <= u[t][:, None]).sum(axis=1)
        return v[states]

    return StationaryModel(
        kind="markov-chain",
        params={"n_states": spec.n_states},
        marginal_cdf=cdf,
        marginal_quantile=quantile,
        analytic_gamma=gamma,
        model_id=f"markov-chain(s={spec.n_states})",
        block_sampler=sampler,
        chain=spec,
    )


def _uniform_cdf(x):
    return np.clip(np.asarray(x, dtype=float), 0.0, 1.0)


def _chain_observable_gamma(spec: MarkovChainSpec, obs_values) -> Callable:
    """Exact lag covariance of g(X_i) for a finite chain, via matrix powers.

    Returns a vectorized j -> Cov(g(X_1), g(X_{1+j})) with a growing cache of
    P^j g, so scans over j cost one matrix-vector product per new lag.
    """
    P, pi = spec.transition, spec.stationary
    g = np.asarray(obs_values, dtype=float)
    mean = float(pi @ g)
    cache = [g.copy()]  # cache[j] = P^j g

    def gamma(j):
        js = np.atleast_1d(np.asarray(j, dtype=int))
        if np.any(js < 0):
            raise InvalidParameterError("lag must be nonnegative")
        while len(cache) <= js.max(initial=0):
            cache.append(P @ cache[-1])
        out = np.array([float(pi @ (g * cache[k])) - mean * mean for k in js])
        return out.reshape(np.shape(j)) if np.ndim(j) else float(out[0])

    return gamma


# ---------------------------------------------------------------------------
# sampling and covariance queries


def validate_model(model: StationaryModel, lags: int = 10) -> None:
    """Grid-check the model invariants: the marginal cdf is nondecreasing
    with limits 0 and 1, and the lag covariance is dominated by gamma(0)."""
    if model.marginal_quantile is not None:
        lo = float(model.marginal_quantile(0.001)) - 10.0
        hi = float(model.marginal_quantile(0.999)) + 10.0
    else:
        lo, hi = -50.0, 50.0
    grid = np.linspace(lo, hi, 501)
    cdf_vals = np.asarray(model.marginal_cdf(grid), dtype=float)
    if np.any(np.diff(cdf_vals) < -1e-12):
        raise InvalidParameterError("marginal cdf is not nondecreasing on the grid")
    if cdf_vals[0] > 1e-6 or cdf_vals[-1] < 1.0 - 1e-6:
        raise InvalidParameterError("marginal cdf does not reach its 0 and 1 limits")
    if model.analytic_gamma is not None:
        g = np.asarray(model.analytic_gamma(np.arange(lags + 1)), dtype=float)
        if g[0] < 0:
            raise InvalidParameterError("gamma(0) must be nonnegative")
        if np.any(np.abs(g[1:]) > g[0] + 1e-12):
            raise InvalidParameterError("|gamma(j)| must not exceed gamma(0)")


def sample_block(model: StationaryModel, n: int, seed_keys) -> np.ndarray:
    """Sample len(seed_keys) paths of length n as columns of an (n, m) array.

    Column r depends only on seed_keys[r], so any partition of the keys into
    blocks (or any worker count) reproduces identical values.
    """
    if n < 1:
        raise InvalidParameterError("path length n must be >= 1")
    gens = [stream(k) for k in seed_keys]
    out = model.block_sampler(int(n), gens)
    if out.shape != (n, len(gens)):
        raise AssertionError("block sampler returned a misshaped array")
    return out


def sample(model: StationaryModel, n: int, seed) -> SamplePath:
    """Sample one stationary path, deterministic in (model, n, seed)."""
    values = sample_block(model, n, [seed])[:, 0]
    return SamplePath(values=values, seed=seed, model_id=model.model_id)


def lag_covariance(
    model: StationaryModel, j: int, budget: int = 200_000, seed=0
) -> CovarianceEstimate:
    """Cov(X_1, X_{1+j}): analytic when the model carries it, else a
    Monte Carlo estimate over one path of `budget` steps with a batch-means
    standard error."""
    if j < 0:
        raise InvalidParameterError("lag must be nonnegative")
    if model.analytic_gamma is not None:
        return CovarianceEstimate(
            value=float(model.analytic_gamma(int(j))), stderr=None, mode="analytic"
        )
    x = sample(model, max(int(budget), 10 * (j + 1)), seed).values
    xc = x - x.mean()
    prods = xc[: len(xc) - j] * xc[j:]
    n_batches = 20
    batches = np.array_split(prods, n_batches)
    means = np.array([b.mean() for b in batches])
    return CovarianceEstimate(
        value=float(prods.mean()),
        stderr=float(means.std(ddof=1) / np.sqrt(n_batches)),
        mode="monte-carlo",
    )


def indicator_lag_covariance(model: StationaryModel, x: float, j):
    """H_x(j) = P(X_1 <= x, X_{1+j} <= x) - F(x)^2, exact per family.

    Gaussian families use the bivariate-normal rectangle probability at the
    lag-j correlation; finite chains use matrix powers; iid is identically 0.
    Accepts a scalar or array of lags j >= 1.
    """
    js = np.asarray(j)
    if np.any(js < 1):
        raise InvalidParameterError("indicator lag covariance needs j >= 1")
    F_x = float(model.marginal_cdf(x))

    if model.kind == "iid":
        out = np.zeros(js.shape, dtype=float)
    elif model.kind == "constant":
        out = np.full(js.shape, F_x * (1.0 - F_x), dtype=float)
    elif model.kind in ("gaussian-ar1", "moving-average"):
        gamma = model.analytic_gamma
        corr = np.asarray(gamma(js), dtype=float) / float(gamma(0))
        z = float(norm.ppf(F_x))  # x in standard units
        out = np.asarray(bvn_indicator_cov(z, z, corr), dtype=float)
    elif model.kind == "markov-chain":
        spec = model.chain
        e = (spec.values <= x).astype(float)
        out = np.asarray(_chain_observable_gamma(spec, e)(js), dtype=float)
    else:
        raise InvalidParameterError(f"unknown model kind {model.kind!r}")
    return out.reshape(np.shape(j)) if np.ndim(j) else float(out)


def transformed_gamma(model: StationaryModel) -> Callable:
    """Lag covariance of U_i = F(X_i), the probability-integral transform.

    For Gaussian families Cov(F(X_1), F(X_{1+j})) = arcsin(r_j / 2) / (2 pi)
    with r_j the lag-j correlation; chains are exact via matrix powers.
    """
    if model.kind in ("iid", "constant"):
        return model.analytic_gamma  # U = X for the uniform marginal
    if model.kind in ("gaussian-ar1", "moving-average"):
        base = model.analytic_gamma
        g0 = float(base(0))

        def gamma_u(j):
            corr = np.asarray(base(j), dtype=float) / g0
            out = np.arcsin(corr / 2.0) / (2.0 * np.pi)
            return out.reshape(np.shape(j)) if np.ndim(j) else float(out)

        return gamma_u
    if model.kind == "markov-chain":
        spec = model.chain
        u_values = model.marginal_cdf(spec.values)
        return _chain_observable_gamma(spec, u_values)
    raise InvalidParameterError(f"unknown model kind {model.kind!r}")


# ---------------------------------------------------------------------------
# uniform mixing coefficients


def phi_mixing_profile(spec: MarkovChainSpec, r_max: int) -> np.ndarray:
    """phi(1..r_max) for a stationary finite chain.

    phi(r) = max over start states i with pi_i > 0 of the total-variation
    distance between row i of P^r and pi: conditioning events reduce to
    atoms of the current state, future events to the lag-r marginal.

    The centered difference D_r = P^r - pi is iterated directly
    (D_{r+1} = D_r P, exact because pi P = pi) in extended precision, and
    the persistent mass component (row sums times pi) is projected out at
    every step. Rounding in pi or in the products would otherwise park an
    error on the unit eigenvalue and floor the profile near machine
    epsilon; with the projection, geometric tails keep full relative
    accuracy down to underflow.
    """
    if r_max < 1:
        raise InvalidParameterError("r_max must be >= 1")
    P = spec.transition.astype(np.longdouble)
    pi = spec.stationary.astype(np.longdouble)
    support = spec.stationary > 0
    out = np.empty(r_max, dtype=float)
    diff = P - pi[None, :]
    diff -= diff.sum(axis=1)[:, None] * pi[None, :]
    for r in range(r_max):
        tv = 0.5 * np.abs(diff).sum(axis=1)
        out[r] = float(tv[support].max())
        if r + 1 < r_max:
            diff = diff @ P
            diff -= diff.sum(axis=1)[:, None] * pi[None, :]
    return out
