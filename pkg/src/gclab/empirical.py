"""Functional empirical measures, exact sup-deviations, and bracket bounds.

The empirical measure of a path is the plain average of an observable over
its values; means are formed with compensated summation so results do not
depend on summation order. The Kolmogorov-Smirnov sup-deviation is computed
exactly from order statistics: the supremum over all reals is attained at
jump points, and both one-sided gaps are evaluated at each distinct value
(the left gap against the cdf's left limit, so atoms in either the path or
the cdf are handled exactly).
"""

from __future__ import annotations

import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InvalidInputError
from .generators import SamplePath, StationaryModel, sample_block
from .rngs import replicate_key

_DIAGNOSTIC_CHUNK = 50  # replicates per task; fixed so chunking never depends on workers


@dataclass(frozen=True)
class Observable:
    """A real observable f(x) with a label; eval must accept numpy arrays."""

    eval: Callable
    label: str = ""


@dataclass(frozen=True)
class BracketNet:
    """A finite cover by function brackets [lower_i, upper_i] at level epsilon,
    with exact expectations of both endpoints under the model marginal."""

    level: float
    brackets: tuple  # of (Observable lower, Observable upper)
    expectations: tuple  # of (E[lower], E[upper])

    def validate(self, test_grid) -> None:
        grid = np.asarray(test_grid, dtype=float)
        for (lo, hi), (e_lo, e_hi) in zip(self.brackets, self.expectations):
            if np.any(_apply(lo, grid) > _apply(hi, grid) + 1e-12):
                raise InvalidInputError("bracket lower exceeds upper on test grid")
            if e_hi - e_lo > self.level + 1e-12:
                raise InvalidInputError("bracket wider than the declared level")


@dataclass(frozen=True)
class DeviationPath:
    """Sup-deviation statistics per sample size over Monte Carlo replicates."""

    n_grid: tuple
    mean: np.ndarray
    median: np.ndarray
    q90: np.ndarray
    reps: int
    seed: int

    CSV_HEADER = "n,mean,median,q90,reps,seed"

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        buf.write(self.CSV_HEADER + "\n")
        for i, n in enumerate(self.n_grid):
            buf.write(
                f"{n},{float(self.mean[i])!r},{float(self.median[i])!r},"
                f"{float(self.q90[i])!r},{self.reps},{self.seed}\n"
            )
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "n_grid": [int(n) for n in self.n_grid],
            "mean": [float(v) for v in self.mean],
            "median": [float(v) for v in self.median],
            "q90": [float(v) for v in self.q90],
            "reps": int(self.reps),
            "seed": int(self.seed),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DeviationPath":
        return cls(
            n_grid=tuple(int(n) for n in d["n_grid"]),
            mean=np.asarray(d["mean"], dtype=float),
            median=np.asarray(d["median"], dtype=float),
            q90=np.asarray(d["q90"], dtype=float),
            reps=int(d["reps"]),
            seed=int(d["seed"]),
        )


def _values(path) -> np.ndarray:
    vals = np.asarray(getattr(path, "values", path), dtype=float)
    if vals.ndim != 1:
        raise InvalidInputError("path must be one-dimensional")
    return vals


def _apply(fn, values: np.ndarray) -> np.ndarray:
    fn = getattr(fn, "eval", fn)
    try:
        out = np.asarray(fn(values), dtype=float)
        if out.shape == values.shape:
            return out
    except (TypeError, ValueError):
        pass
    return np.array([float(fn(x)) for x in values])  # scalar-only callables


def empirical_measure(path, f) -> float:
    """P_n(f): mean of f over the path, by compensated summation."""
    vals = _values(path)
    if vals.size == 0:
        raise InvalidInputError("empirical measure of an empty path")
    return math.fsum(_apply(f, vals)) / vals.size


def empirical_set_measure(path, predicate) -> float:
    """P_n(C): fraction of path values for which the set predicate holds."""
    vals = _values(path)
    if vals.size == 0:
        raise InvalidInputError("empirical measure of an empty path")
    member = getattr(predicate, "eval", predicate)
    try:
        out = np.asarray(member(vals))
        if out.shape != vals.shape:
            raise ValueError
    except (TypeError, ValueError):
        out = np.array([bool(member(x)) for x in vals])
    return math.fsum(out.astype(float)) / vals.size


def empirical_cdf(path, x):
    """F_n(x): fraction of path values <= x (scalar or array x)."""
    vals = _values(path)
    if vals.size == 0:
        raise InvalidInputError("empirical cdf of an empty path")
    counts = np.searchsorted(np.sort(vals), x, side="right")
    out = counts / vals.size
    return float(out) if np.ndim(x) == 0 else out


def ks_sup_deviation(path, cdf) -> float:
    """sup_x |F_n(x) - F(x)|, exact via both one-sided gaps at each distinct
    value; the left gap uses F's left limit so point masses are exact."""
    vals = _values(path)
    if vals.size == 0:
        raise InvalidInputError("sup-deviation of an empty path")
    n = vals.size
    v, counts = np.unique(vals, return_counts=True)
    cum = np.cumsum(counts) / n
    prev = np.concatenate(([0.0], cum[:-1]))
    f_right = np.asarray(cdf(v), dtype=float)
    f_left = np.asarray(cdf(np.nextafter(v, -np.inf)), dtype=float)
    return float(max(np.abs(cum - f_right).max(), np.abs(prev - f_left).max()))


def probability_integral_transform(path, cdf) -> SamplePath:
    """U_i = F(X_i); for continuous strictly increasing F the result is
    Uniform(0,1) with the same sup-deviation as the original path."""
    vals = _values(path)
    return SamplePath(
        values=np.asarray(cdf(vals), dtype=float),
        seed=getattr(path, "seed", None),
        model_id=f"{getattr(path, 'model_id', 'path')}|pit",
    )


def bracket_sup_bound(path, net: BracketNet) -> float:
    """Upper bound on the sup-deviation over any class covered by the net:

        level + max_i max(E[lower_i] - P_n(lower_i), P_n(upper_i) - E[upper_i])
    """
    if not net.brackets:
        raise InvalidInputError("bracket net is empty")
    terms = []
    for (lo, hi), (e_lo, e_hi) in zip(net.brackets, net.expectations):
        terms.append(e_lo - empirical_measure(path, lo))
        terms.append(empirical_measure(path, hi) - e_hi)
    return float(net.level + max(terms))


def run_gc_diagnostic(
    model: StationaryModel,
    n_grid,
    reps: int = 200,
    seed: int = 0,
    threads: int = 1,
) -> DeviationPath:
    """Sup-deviation statistics of the model across a grid of sample sizes.

    Each (n, replicate) pair draws from its own counter-based stream and
    results are merged by replicate index, so output is identical for any
    thread count. Paths are streamed chunkwise and never retained.
    """
    n_grid = tuple(int(n) for n in n_grid)
    if len(n_grid) == 0 or any(b <= a for a, b in zip(n_grid, n_grid[1:])):
        raise InvalidInputError("n_grid must be nonempty and strictly increasing")
    if reps < 1:
        raise InvalidInputError("need at least one replicate")
    cdf = model.marginal_cdf
    devs = np.empty((len(n_grid), reps), dtype=float)

    tasks = [
        (i, lo, min(lo + _DIAGNOSTIC_CHUNK, reps))
        for i in range(len(n_grid))
        for lo in range(0, reps, _DIAGNOSTIC_CHUNK)
    ]

    def work(task):
        i, lo, hi = task
        keys = [replicate_key(seed, i, r) for r in range(lo, hi)]
        block = sample_block(model, n_grid[i], keys)
        return i, lo, [ks_sup_deviation(block[:, c], cdf) for c in range(hi - lo)]

    if threads <= 1:
        results = map(work, tasks)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, tasks))
    for i, lo, vals in results:
        devs[i, lo : lo + len(vals)] = vals

    return DeviationPath(
        n_grid=n_grid,
        mean=devs.mean(axis=1),
        median=np.median(devs, axis=1),
        q90=np.quantile(devs, 0.9, axis=1),
        reps=reps,
        seed=seed,
    )
