"""Experiment config files: a flat INI-style schema with strict validation.

Sections and keys (all optional except [model] kind):

    [model]       kind = iid-uniform | constant | gaussian-ar1 |
                         moving-average | markov-chain
                  rho = 0.6                      (gaussian-ar1)
                  coeffs = 1, 0.5                (moving-average)
                  innovation_sd = 1.0            (moving-average)
                  transition = 0.9 0.1; 0.2 0.8  (markov-chain, rows ;-separated)
                  values = 0, 1                  (markov-chain)
    [experiment]  n_grid, reps, seed, q_max, delta_grid, x_quantiles,
                  r_max, truncation
    [entropy]     epsilons, bound_k, bound_r, probe_budget
    [output]      directory

Unknown sections or keys are rejected by name so typos never pass silently.
"""

from __future__ import annotations

import configparser
import hashlib
import io

from .montecarlo import ExperimentSpec

_MODEL_KINDS = ("iid-uniform", "constant", "gaussian-ar1", "moving-average", "markov-chain")

_SCHEMA = {
    "model": ("kind", "rho", "coeffs", "innovation_sd", "transition", "values"),
    "experiment": (
        "n_grid", "reps", "seed", "q_max", "delta_grid",
        "x_quantiles", "r_max", "truncation",
    ),
    "entropy": ("epsilons", "bound_k", "bound_r", "probe_budget"),
    "output": ("directory",),
}


class ConfigError(ValueError):
    """A config file violates the documented schema; messages name the key."""


def _floats(text: str) -> tuple:
    return tuple(float(tok) for tok in text.replace(",", " ").split())


def _ints(text: str) -> tuple:
    return tuple(int(tok) for tok in text.replace(",", " ").split())


def _matrix(text: str) -> tuple:
    return tuple(_floats(row) for row in text.split(";") if row.strip())


def parse_config(text: str) -> ExperimentSpec:
    """Parse and validate config text into a fully defaulted ExperimentSpec."""
    cp = configparser.ConfigParser()
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config parse error: {exc}") from exc

    for section in cp.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        for key in cp[section]:
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown key '{key}' in section [{section}]")

    if not cp.has_section("model") or "kind" not in cp["model"]:
        raise ConfigError("missing required key 'kind' in section [model]")

    fields = {}
    model = cp["model"]
    kind = model["kind"].strip()
    if kind not in _MODEL_KINDS:
        raise ConfigError(f"kind '{kind}' is not one of {_MODEL_KINDS}")
    fields["kind"] = kind

    try:
        if "rho" in model:
            fields["rho"] = float(model["rho"])
        if "coeffs" in model:
            fields["coeffs"] = _floats(model["coeffs"])
        if "innovation_sd" in model:
            fields["innovation_sd"] = float(model["innovation_sd"])
        if "transition" in model:
            fields["transition"] = _matrix(model["transition"])
        if "values" in model:
            fields["values"] = _floats(model["values"])

        if cp.has_section("experiment"):
            exp = cp["experiment"]
            if "n_grid" in exp:
                fields["n_grid"] = _ints(exp["n_grid"])
            for key in ("reps", "seed", "q_max", "x_quantiles", "r_max", "truncation"):
                if key in exp:
                    fields[key] = int(exp[key])
            if "delta_grid" in exp:
                fields["delta_grid"] = _floats(exp["delta_grid"])

        if cp.has_section("entropy"):
            ent = cp["entropy"]
            if "epsilons" in ent:
                fields["epsilons"] = _floats(ent["epsilons"])
            for key in ("bound_k", "bound_r"):
                if key in ent:
                    fields[key] = float(ent[key])
            if "probe_budget" in ent:
                fields["probe_budget"] = int(ent["probe_budget"])

        if cp.has_section("output") and "directory" in cp["output"]:
            fields["output_dir"] = cp["output"]["directory"].strip()
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"malformed value: {exc}") from exc

    spec = ExperimentSpec(**fields)
    _validate(spec)
    return spec


def _validate(spec: ExperimentSpec) -> None:
    if spec.kind == "gaussian-ar1":
        if spec.rho is None:
            raise ConfigError("gaussian-ar1 requires key 'rho' in [model]")
        if not 0.0 <= spec.rho < 1.0:
            raise ConfigError(
                f"rho={spec.rho:g} violates the association constraint: "
                "gaussian-ar1 requires rho in [0, 1)"
            )
    if spec.kind == "moving-average":
        if not spec.coeffs:
            raise ConfigError("moving-average requires key 'coeffs' in [model]")
        if any(c < 0 for c in spec.coeffs):
            raise ConfigError(
                "coeffs must be nonnegative: association requires "
                "nonnegative moving-average coefficients"
            )
        if spec.innovation_sd <= 0:
            raise ConfigError("innovation_sd must be positive")
    if spec.kind == "markov-chain" and (spec.transition is None or spec.values is None):
        raise ConfigError("markov-chain requires keys 'transition' and 'values' in [model]")
    for delta in spec.delta_grid:
        if not 0.0 < delta < 3.0:
            raise ConfigError(f"delta={delta:g} violates delta in (0, 3)")
    if len(spec.n_grid) == 0 or any(
        b <= a for a, b in zip(spec.n_grid, spec.n_grid[1:])
    ):
        raise ConfigError("n_grid must be strictly increasing")
    if any(n < 1 for n in spec.n_grid):
        raise ConfigError("n_grid entries must be >= 1")
    if spec.reps < 1:
        raise ConfigError("reps must be >= 1")
    if spec.q_max < 4:
        raise ConfigError("q_max must be >= 4")
    if spec.x_quantiles < 1:
        raise ConfigError("x_quantiles must be >= 1")
    if spec.r_max < 1:
        raise ConfigError("r_max must be >= 1")
    if spec.truncation < 0:
        raise ConfigError("truncation must be >= 0")
    for eps in spec.epsilons:
        if not 0.0 < eps <= 1.0:
            raise ConfigError(f"epsilon={eps:g} must lie in (0, 1]")
    if spec.bound_k <= 0 or spec.bound_r <= 1:
        raise ConfigError("entropy bound needs bound_k > 0 and bound_r > 1")
    if spec.probe_budget < 1:
        raise ConfigError("probe_budget must be >= 1")


def serialize_config(spec: ExperimentSpec) -> str:
    """Canonical config text; parse_config(serialize_config(s)) == s."""
    buf = io.StringIO()
    buf.write("[model]\n")
    buf.write(f"kind = {spec.kind}\n")
    if spec.rho is not None:
        buf.write(f"rho = {spec.rho!r}\n")
    if spec.coeffs is not None:
        buf.write(f"coeffs = {', '.join(repr(c) for c in spec.coeffs)}\n")
        buf.write(f"innovation_sd = {spec.innovation_sd!r}\n")
    if spec.transition is not None:
        rows = "; ".join(" ".join(repr(v) for v in row) for row in spec.transition)
        buf.write(f"transition = {rows}\n")
    if spec.values is not None:
        buf.write(f"values = {', '.join(repr(v) for v in spec.values)}\n")
    buf.write("\n[experiment]\n")
    buf.write(f"n_grid = {', '.join(str(n) for n in spec.n_grid)}\n")
    buf.write(f"reps = {spec.reps}\n")
    buf.write(f"seed = {spec.seed}\n")
    buf.write(f"q_max = {spec.q_max}\n")
    buf.write(f"delta_grid = {', '.join(repr(d) for d in spec.delta_grid)}\n")
    buf.write(f"x_quantiles = {spec.x_quantiles}\n")
    buf.write(f"r_max = {spec.r_max}\n")
    buf.write(f"truncation = {spec.truncation}\n")
    buf.write("\n[entropy]\n")
    buf.write(f"epsilons = {', '.join(repr(e) for e in spec.epsilons)}\n")
    buf.write(f"bound_k = {spec.bound_k!r}\n")
    buf.write(f"bound_r = {spec.bound_r!r}\n")
    buf.write(f"probe_budget = {spec.probe_budget}\n")
    buf.write("\n[output]\n")
    buf.write(f"directory = {spec.output_dir}\n")
    return buf.getvalue()


def spec_hash(spec: ExperimentSpec) -> str:
    """Short stable hash of the canonical config, stamped into reports."""
    return hashlib.sha256(serialize_config(spec).encode()).hexdigest()[:16]
