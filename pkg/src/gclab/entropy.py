"""Bracketing numbers, brute-force shattering, and the VC entropy bound.

Shattering is decided exactly: for a finite point set only finitely many
intersections with a parametric family are achievable, and each family
enumerates the critical parameters that realize all of them (for half-lines,
midpoints of the sorted points plus sentinels beyond the extremes).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .empirical import BracketNet, Observable
from .errors import CapacityError, InvalidParameterError
from .rngs import stream

_SHATTER_LIMIT = 20  # exhaustive 2^|B| search cap


@dataclass(frozen=True)
class SetFamily:
    """A parametric family of subsets of the reals.

    membership(theta, x) decides x in C_theta; critical_parameters(points)
    enumerates finitely many theta realizing every achievable intersection
    with the given finite point set. domain, when not None, restricts probe
    points to a finite universe.
    """

    label: str
    membership: Callable
    critical_parameters: Callable
    domain: Optional[np.ndarray] = None


def half_lines() -> SetFamily:
    """The family {(-inf, t] : t real}."""

    def critical(points):
        pts = np.sort(np.asarray(points, dtype=float))
        return np.concatenate(
            ([pts[0] - 1.0], (pts[:-1] + pts[1:]) / 2.0, [pts[-1] + 1.0])
        )

    return SetFamily(
        label="half-lines",
        membership=lambda t, x: x <= t,
        critical_parameters=critical,
    )


def closed_intervals() -> SetFamily:
    """The family {[a, b] : a <= b}."""

    def critical(points):
        pts = np.sort(np.asarray(points, dtype=float))
        cuts = np.concatenate(
            ([pts[0] - 1.0], (pts[:-1] + pts[1:]) / 2.0, [pts[-1] + 1.0])
        )
        return [(a, b) for i, a in enumerate(cuts) for b in cuts[i:]]

    return SetFamily(
        label="closed-intervals",
        membership=lambda ab, x: ab[0] <= x <= ab[1],
        critical_parameters=critical,
    )


def finite_power_set(universe) -> SetFamily:
    """Every subset of a small finite universe; shatters anything inside it."""
    uni = np.unique(np.asarray(universe, dtype=float))
    if uni.size > 16:
        raise CapacityError("power-set family capped at 16 universe points")
    members = [
        frozenset(uni[k] for k in range(uni.size) if mask >> k & 1)
        for mask in range(1 << uni.size)
    ]
    return SetFamily(
        label=f"power-set({uni.size})",
        membership=lambda s, x: x in s,
        critical_parameters=lambda points: members,
        domain=uni,
    )


def shatters(points, family: SetFamily) -> bool:
    """True iff every subset of `points` is picked out by the family.

    Exhaustive over the 2^|B| subsets; needs |B| <= 20.
    """
    pts = np.unique(np.asarray(points, dtype=float))
    if pts.size > _SHATTER_LIMIT:
        raise CapacityError(f"shattering search capped at {_SHATTER_LIMIT} points")
    achieved = set()
    target = 1 << pts.size
    for theta in family.critical_parameters(pts):
        picked = frozenset(
            i for i, p in enumerate(pts) if family.membership(theta, p)
        )
        achieved.add(picked)
        if len(achieved) == target:
            return True
    return False


@dataclass(frozen=True)
class VcIndexResult:
    """Outcome of probing shattered cardinalities.

    `index` follows the usage that labels a family by the smallest
    cardinality no probed set of which is shattered; the raw quantities
    (largest shattered, smallest unshattered) are reported alongside.
    """

    index: Optional[int]
    largest_shattered: int
    smallest_unshattered: Optional[int]
    indeterminate: bool
    configs_probed: int

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "largest_shattered": self.largest_shattered,
            "smallest_unshattered": self.smallest_unshattered,
            "indeterminate": self.indeterminate,
            "configs_probed": self.configs_probed,
        }


def vc_index(
    family: SetFamily,
    probe_budget: int = 32,
    max_cardinality: int = 12,
    seed: int = 0,
) -> VcIndexResult:
    """Probe point configurations of growing size until none is shattered.

    Each cardinality tries one deterministic generic configuration (equally
    spaced distinct points) plus `probe_budget` random perturbations. If the
    family still shatters at `max_cardinality`, or its finite domain is
    exhausted, the result is flagged indeterminate.
    """
    rng = stream(("vc-probe", seed))
    probed = 0
    largest = 0
    for n in range(1, max_cardinality + 1):
        configs = []
        if family.domain is not None:
            if family.domain.size < n:
                return VcIndexResult(None, largest, None, True, probed)
            configs.append(family.domain[:n])
            for _ in range(probe_budget):
                configs.append(rng.choice(family.domain, size=n, replace=False))
        else:
            configs.append(np.arange(n, dtype=float))
            for _ in range(probe_budget):
                configs.append(np.sort(rng.standard_normal(n)) * (1.0 + rng.random()))
        shattered = False
        for cfg in configs:
            probed += 1
            if shatters(cfg, family):
                shattered = True
                break
        if shattered:
            largest = n
        else:
            return VcIndexResult(n, largest, n, False, probed)
    return VcIndexResult(None, largest, None, True, probed)


def bracket_net_halflines(cdf, epsilon: float, quantile=None) -> BracketNet:
    """Cover the half-line indicator class with ceil(1/epsilon) cdf brackets.

    The grid is the quantile grid at levels k/p, so consecutive cdf
    increments are at most epsilon; bracket endpoints are half-line
    indicators with exact expectations F(x_k).
    """
    if not 0.0 < epsilon <= 1.0:
        raise InvalidParameterError("epsilon must lie in (0, 1]")
    p = math.ceil(1.0 / epsilon)
    levels = np.arange(p + 1) / p
    if quantile is not None:
        grid = np.asarray(quantile(levels), dtype=float)
    else:
        grid = np.array([_numeric_quantile(cdf, lv) for lv in levels])
    grid[0] = grid[0] if np.isfinite(grid[0]) else -np.inf
    brackets = []
    expectations = []
    for k in range(p):
        lo, hi = grid[k], grid[k + 1]
        brackets.append(
            (
                Observable(_halfline_indicator(lo), f"1{{x<={lo:g}}}"),
                Observable(_halfline_indicator(hi), f"1{{x<={hi:g}}}"),
            )
        )
        expectations.append((_cdf_at(cdf, lo), _cdf_at(cdf, hi)))
    return BracketNet(
        level=float(epsilon), brackets=tuple(brackets), expectations=tuple(expectations)
    )


def _halfline_indicator(threshold):
    def indicator(x, _t=threshold):
        return (np.asarray(x, dtype=float) <= _t).astype(float)

    return indicator


def _cdf_at(cdf, x) -> float:
    if x == -np.inf:
        return 0.0
    if x == np.inf:
        return 1.0
    return float(cdf(x))


def _numeric_quantile(cdf, level: float) -> float:
    """Generalized inverse by bisection; levels 0 and 1 map to -/+inf."""
    if level <= 0.0:
        return -np.inf
    if level >= 1.0:
        return np.inf
    lo, hi = -1.0, 1.0
    while float(cdf(lo)) > level:
        lo *= 2.0
    while float(cdf(hi)) < level:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if float(cdf(mid)) < level:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def vc_entropy_bound(index: int, epsilon: float, K: float = 1.0, r: float = 2.0) -> float:
    """K * I * (4e)^I * (1/epsilon)^(r (I - 1)).

    K and r are unspecified universal constants; the defaults K=1, r=2 are
    non-normative placeholders for comparing bound shapes.
    """
    if index < 1:
        raise InvalidParameterError("index must be >= 1")
    if epsilon <= 0:
        raise InvalidParameterError("epsilon must be positive")
    if K <= 0 or r <= 1:
        raise InvalidParameterError("need K > 0 and r > 1")
    four_e = 4.0 * math.e
    return K * index * four_e**index * (1.0 / epsilon) ** (r * (index - 1))


@dataclass(frozen=True)
class EntropyReport:
    """Bracketing count for one level, with optional VC index and bound."""

    family: str
    epsilon: float
    norm: str
    bracket_count: int
    construction: tuple = ()
    vc_index: Optional[int] = None
    bound_params: Optional[dict] = None
    bound_value: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "epsilon": self.epsilon,
            "norm": self.norm,
            "bracket_count": self.bracket_count,
            "vc_index": self.vc_index,
            "bound_params": self.bound_params,
            "bound_value": self.bound_value,
        }


def halfline_entropy_report(
    cdf,
    epsilon: float,
    quantile=None,
    K: float = 1.0,
    r: float = 2.0,
    probe_budget: int = 32,
) -> EntropyReport:
    """Bracket the half-line class at one level and attach the VC bound."""
    net = bracket_net_halflines(cdf, epsilon, quantile=quantile)
    vc = vc_index(half_lines(), probe_budget=probe_budget)
    bound = None
    if vc.index is not None:
        bound = vc_entropy_bound(vc.index, epsilon, K=K, r=r)
    # the cdf-level grid k/p realized by the net, recorded as construction
    grid = tuple(e_lo for e_lo, _ in net.expectations) + (net.expectations[-1][1],)
    return EntropyReport(
        family="half-lines",
        epsilon=float(epsilon),
        norm="L1(cdf-increment)",
        bracket_count=len(net.brackets),
        construction=grid,
        vc_index=vc.index,
        bound_params={"K": K, "r": r},
        bound_value=bound,
    )
