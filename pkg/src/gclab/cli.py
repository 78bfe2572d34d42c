"""Command-line front door: a thin client of the lab service.

Subcommands simulate | conditions | entropy | inequalities dispatch one
HTTP request each; by default the service app is driven in-process through
an ASGI transport, and --server points the same client at a remote
instance. `report` merges previously written artifacts into one summary
plus plot-ready CSV files. Every JSON artifact carries the spec hash and
seed; --threads changes speed only, never output bytes.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import sys
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

import httpx

from .config import ConfigError, parse_config, spec_hash
from .empirical import DeviationPath
from .montecarlo import ExperimentSpec

_TIMEOUT = 600.0


@dataclass(frozen=True)
class CliConfig:
    """Parsed command line: subcommand plus the overrides it may apply."""

    subcommand: str
    config_path: Optional[str]
    seed_override: Optional[int]
    output_dir: Optional[str]
    threads: int
    server: Optional[str]
    quiet: bool


class ServiceClient:
    """POSTs to a running service when --server is given, otherwise drives
    the app in-process over an ASGI transport (same code path, no socket)."""

    def __init__(self, server: Optional[str] = None):
        self.server = server

    def post(self, path: str, payload: dict) -> dict:
        if self.server is not None:
            with httpx.Client(base_url=self.server, timeout=_TIMEOUT) as client:
                response = client.post(path, json=payload)
        else:
            response = asyncio.run(self._post_in_process(path, payload))
        if response.status_code != 200:
            try:
                detail = response.json().get("detail", response.text)
            except ValueError:
                detail = response.text
            raise RuntimeError(f"service error on {path}: {detail}")
        return response.json()

    @staticmethod
    async def _post_in_process(path: str, payload: dict) -> httpx.Response:
        from .service.app import app

        transport = httpx.ASGITransport(app=app)
        async with httpx.AsyncClient(
            transport=transport, base_url="http://gclab.internal", timeout=_TIMEOUT
        ) as client:
            return await client.post(path, json=payload)


def model_payload(spec: ExperimentSpec) -> dict:
    payload = {"kind": spec.kind, "innovation_sd": spec.innovation_sd}
    if spec.rho is not None:
        payload["rho"] = spec.rho
    if spec.coeffs is not None:
        payload["coeffs"] = list(spec.coeffs)
    if spec.transition is not None:
        payload["transition"] = [list(row) for row in spec.transition]
    if spec.values is not None:
        payload["values"] = list(spec.values)
    return payload


def _load_spec(cfg: CliConfig) -> ExperimentSpec:
    if cfg.config_path is None:
        raise ConfigError(f"subcommand '{cfg.subcommand}' requires --config PATH")
    text = Path(cfg.config_path).read_text()
    spec = parse_config(text)
    if cfg.seed_override is not None:
        spec = spec.with_seed(cfg.seed_override)
    if cfg.output_dir is not None:
        spec = replace(spec, output_dir=cfg.output_dir)
    return spec


def _out_dir(spec: ExperimentSpec) -> Path:
    out = Path(spec.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, obj: dict) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _say(cfg: CliConfig, message: str) -> None:
    if not cfg.quiet:
        print(message)


def cmd_simulate(cfg: CliConfig, client: ServiceClient) -> int:
    spec = _load_spec(cfg)
    out = _out_dir(spec)
    payload = {
        "model": model_payload(spec),
        "n_grid": list(spec.n_grid),
        "reps": spec.reps,
        "seed": spec.seed,
        "threads": cfg.threads,
    }
    resp = client.post("/simulate", payload)
    path = DeviationPath.from_dict(resp)
    (out / "deviation.csv").write_text(path.to_csv_text())
    _write_json(out / "simulate.json", {"spec_hash": spec_hash(spec), "seed": spec.seed, **resp})
    _say(cfg, f"wrote {out / 'deviation.csv'} and {out / 'simulate.json'}")
    return 0


def cmd_conditions(cfg: CliConfig, client: ServiceClient) -> int:
    spec = _load_spec(cfg)
    out = _out_dir(spec)
    payload = {
        "model": model_payload(spec),
        "delta_grid": list(spec.delta_grid),
        "q_max": spec.q_max,
        "x_quantiles": spec.x_quantiles,
        "r_max": spec.r_max,
        "truncation": spec.truncation,
    }
    resp = client.post("/conditions", payload)
    _write_json(out / "conditions.json", {"spec_hash": spec_hash(spec), "seed": spec.seed, **resp})
    (out / "conditions.csv").write_text(_conditions_csv(resp))
    _say(cfg, f"wrote {out / 'conditions.json'} and {out / 'conditions.csv'}")
    return 0


def _report_rows(report: dict) -> list:
    tags = ",".join(
        f"{k}={report['params'][k]:g}" for k in ("delta", "x") if k in report["params"]
    )
    name = f"{report['condition_id']}({tags})" if tags else report["condition_id"]
    return [
        f"{name},{q},{s!r}" for q, s in zip(report["q_grid"], report["statistic"])
    ]


def _conditions_csv(resp: dict) -> str:
    lines = ["condition_id,q,statistic"]
    for report in resp["gcip"]:
        lines.extend(_report_rows(report))
    for key in ("worst_c1", "worst_c2"):
        if resp["gcep"][key] is not None:
            lines.extend(_report_rows(resp["gcep"][key]))
    for key in ("cesaro_cov13", "cesaro_cov"):
        if resp[key] is not None:
            lines.extend(_report_rows(resp[key]))
    return "\n".join(lines) + "\n"


def cmd_entropy(cfg: CliConfig, client: ServiceClient) -> int:
    spec = _load_spec(cfg)
    out = _out_dir(spec)
    marginal = "normal" if spec.kind in ("gaussian-ar1", "moving-average") else "uniform"
    payload = {
        "marginal": marginal,
        "epsilons": list(spec.epsilons),
        "bound_k": spec.bound_k,
        "bound_r": spec.bound_r,
        "probe_budget": spec.probe_budget,
    }
    resp = client.post("/entropy", payload)
    _write_json(out / "entropy.json", {"spec_hash": spec_hash(spec), "seed": spec.seed, **resp})
    _say(cfg, f"wrote {out / 'entropy.json'}")
    return 0


def cmd_inequalities(cfg: CliConfig, client: ServiceClient) -> int:
    spec = _load_spec(cfg)
    out = _out_dir(spec)
    payload = {"model": model_payload(spec), "seed": spec.seed}
    resp = client.post("/inequalities", payload)
    _write_json(
        out / "inequalities.json", {"spec_hash": spec_hash(spec), "seed": spec.seed, **resp}
    )
    _say(cfg, f"wrote {out / 'inequalities.json'}")
    return 0


def cmd_report(cfg: CliConfig) -> int:
    out = Path(cfg.output_dir or "out")
    if not out.is_dir():
        raise RuntimeError(f"output directory {out} does not exist")
    summary = {"artifacts": {}}
    found = False

    sim_path = out / "simulate.json"
    if sim_path.exists():
        found = True
        sim = json.loads(sim_path.read_text())
        summary["spec_hash"] = sim.get("spec_hash")
        summary["seed"] = sim.get("seed")
        summary["artifacts"]["simulate"] = {
            "model_id": sim.get("model_id"),
            "final_mean_deviation": sim["mean"][-1],
            "slope": sim.get("slope"),
        }
        rows = ["n,mean,median,q90"]
        rows += [
            f"{n},{m!r},{md!r},{q!r}"
            for n, m, md, q in zip(sim["n_grid"], sim["mean"], sim["median"], sim["q90"])
        ]
        (out / "deviation_vs_n.csv").write_text("\n".join(rows) + "\n")

    cond_path = out / "conditions.json"
    if cond_path.exists():
        found = True
        cond = json.loads(cond_path.read_text())
        summary.setdefault("spec_hash", cond.get("spec_hash"))
        summary.setdefault("seed", cond.get("seed"))
        verdicts = {
            f"{r['condition_id']}(delta={r['params']['delta']:g})": r["verdict"]
            for r in cond["gcip"]
        }
        for key in ("worst_c1", "worst_c2"):
            if cond["gcep"][key] is not None:
                verdicts[f"gcep-{key}"] = cond["gcep"][key]["verdict"]
        summary["artifacts"]["conditions"] = {
            "model_id": cond.get("model_id"),
            "verdicts": verdicts,
        }
        (out / "statistic_vs_q.csv").write_text(_conditions_csv(cond))

    for name in ("entropy", "inequalities"):
        path = out / f"{name}.json"
        if path.exists():
            found = True
            blob = json.loads(path.read_text())
            if name == "entropy":
                summary["artifacts"]["entropy"] = {
                    "bracket_counts": {
                        str(r["epsilon"]): r["bracket_count"] for r in blob["reports"]
                    },
                    "half_line_index": blob["half_lines"]["index"],
                }
            else:
                summary["artifacts"]["inequalities"] = {
                    "total": len(blob["verdicts"]),
                    "holds": sum(v["holds"] for v in blob["verdicts"]),
                }

    if not found:
        raise RuntimeError(f"no artifacts found in {out}")
    _write_json(out / "summary.json", summary)
    _say(cfg, f"wrote {out / 'summary.json'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gclab",
        description="Dependence lab: simulate sup-deviations and check convergence conditions.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name, helptext in (
        ("simulate", "run the convergence study for a config"),
        ("conditions", "evaluate the condition suite for a config"),
        ("entropy", "bracketing and shattering reports"),
        ("inequalities", "covariance inequality battery"),
        ("report", "merge prior outputs into a summary and plot data"),
    ):
        p = sub.add_parser(name, help=helptext)
        if name != "report":
            p.add_argument("--config", required=True, help="experiment config file")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--threads", type=int, default=1,
                       help="worker threads (speed only, never output bytes)")
        p.add_argument("--server", default=None,
                       help="base URL of a running service; default runs in-process")
        p.add_argument("--quiet", action="store_true", help="suppress progress output")
    return parser


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    cfg = CliConfig(
        subcommand=ns.subcommand,
        config_path=getattr(ns, "config", None),
        seed_override=ns.seed,
        output_dir=ns.out,
        threads=ns.threads,
        server=ns.server,
        quiet=ns.quiet,
    )
    try:
        if cfg.subcommand == "report":
            return cmd_report(cfg)
        client = ServiceClient(cfg.server)
        handler = {
            "simulate": cmd_simulate,
            "conditions": cmd_conditions,
            "entropy": cmd_entropy,
            "inequalities": cmd_inequalities,
        }[cfg.subcommand]
        return handler(cfg, client)
    except (ConfigError, RuntimeError, OSError) as exc:
        print(f"gclab {cfg.subcommand}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
