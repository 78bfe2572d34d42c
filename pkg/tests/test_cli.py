import json
import subprocess
import sys
from pathlib import Path

import pytest

from gclab.cli import main

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def write_config(tmp_path, body):
    path = tmp_path / "exp.ini"
    path.write_text(body)
    return str(path)


SMALL_IID = """\
[model]
kind = iid-uniform

[experiment]
n_grid = 64, 128, 256
reps = 40
seed = 3
"""

SMALL_CHAIN = """\
[model]
kind = markov-chain
transition = 0.9 0.1; 0.2 0.8
values = 0, 1

[experiment]
n_grid = 64, 128
reps = 20
seed = 3
q_max = 150
r_max = 64
"""


def test_simulate_writes_contract_csv(tmp_path):
    cfg = write_config(tmp_path, SMALL_IID)
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "o"), "--quiet"]) == 0
    lines = (tmp_path / "o" / "deviation.csv").read_text().splitlines()
    assert lines[0] == "n,mean,median,q90,reps,seed"
    assert len(lines) == 4
    assert lines[1].startswith("64,")
    blob = json.loads((tmp_path / "o" / "simulate.json").read_text())
    assert "spec_hash" in blob and blob["seed"] == 3


def test_simulate_seed_override(tmp_path):
    cfg = write_config(tmp_path, SMALL_IID)
    main(["simulate", "--config", cfg, "--out", str(tmp_path / "a"), "--quiet"])
    main(["simulate", "--config", cfg, "--out", str(tmp_path / "b"), "--seed", "99", "--quiet"])
    a = (tmp_path / "a" / "deviation.csv").read_text()
    b = (tmp_path / "b" / "deviation.csv").read_text()
    assert a != b
    assert b.splitlines()[1].endswith(",99")


def test_conditions_json_contains_verdicts(tmp_path):
    cfg = write_config(tmp_path, SMALL_CHAIN)
    assert main(["conditions", "--config", cfg, "--out", str(tmp_path / "o"), "--quiet"]) == 0
    blob = json.loads((tmp_path / "o" / "conditions.json").read_text())
    assert {r["condition_id"] for r in blob["gcip"]} == {"gcip-c1", "gcip-c2"}
    assert blob["gcep"]["worst_c1"]["verdict"] == "bounded"
    assert blob["phi"]["checks"]
    csv_lines = (tmp_path / "o" / "conditions.csv").read_text().splitlines()
    assert csv_lines[0] == "condition_id,q,statistic"
    assert any(line.startswith("gcip-c1(delta=0.5),1,") for line in csv_lines)


def test_entropy_and_inequalities_artifacts(tmp_path):
    cfg = write_config(tmp_path, SMALL_CHAIN)
    out = str(tmp_path / "o")
    assert main(["entropy", "--config", cfg, "--out", out, "--quiet"]) == 0
    assert main(["inequalities", "--config", cfg, "--out", out, "--quiet"]) == 0
    entropy = json.loads((tmp_path / "o" / "entropy.json").read_text())
    assert entropy["half_lines"]["index"] == 2
    ineq = json.loads((tmp_path / "o" / "inequalities.json").read_text())
    assert all(v["holds"] for v in ineq["verdicts"])
    # every JSON artifact carries the reproducibility stamp
    for blob in (entropy, ineq):
        assert blob["spec_hash"] and "seed" in blob


def test_report_merges_artifacts(tmp_path):
    cfg = write_config(tmp_path, SMALL_IID)
    out = str(tmp_path / "o")
    main(["simulate", "--config", cfg, "--out", out, "--quiet"])
    main(["conditions", "--config", cfg, "--out", out, "--quiet"])
    assert main(["report", "--out", out, "--quiet"]) == 0
    summary = json.loads((tmp_path / "o" / "summary.json").read_text())
    assert summary["spec_hash"]
    assert "simulate" in summary["artifacts"]
    assert "conditions" in summary["artifacts"]
    plot = (tmp_path / "o" / "deviation_vs_n.csv").read_text().splitlines()
    assert plot[0] == "n,mean,median,q90"
    assert (tmp_path / "o" / "statistic_vs_q.csv").exists()


def test_report_with_no_artifacts_fails(tmp_path):
    (tmp_path / "empty").mkdir()
    assert main(["report", "--out", str(tmp_path / "empty"), "--quiet"]) == 1


def test_missing_config_file_is_clean_error(tmp_path, capsys):
    rc = main(["simulate", "--config", str(tmp_path / "nope.ini"), "--quiet"])
    assert rc == 1
    assert "simulate" in capsys.readouterr().err


def test_schema_violation_is_clean_error(tmp_path, capsys):
    cfg = write_config(tmp_path, "[model]\nkind = gaussian-ar1\nrho = -0.2\n")
    rc = main(["simulate", "--config", cfg, "--quiet"])
    assert rc == 1
    assert "association" in capsys.readouterr().err


def test_unknown_subcommand_usage_and_nonzero():
    proc = subprocess.run(
        [sys.executable, "-m", "gclab.cli", "orbit"], capture_output=True, text=True
    )
    assert proc.returncode != 0
    assert "usage" in proc.stderr.lower()


def test_console_entry_point_smoke(tmp_path):
    cfg = write_config(tmp_path, SMALL_IID)
    proc = subprocess.run(
        [
            sys.executable, "-m", "gclab.cli", "simulate",
            "--config", cfg, "--out", str(tmp_path / "o"),
        ],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert (tmp_path / "o" / "deviation.csv").exists()


@pytest.mark.parametrize("name", ["iid_uniform.ini", "ar1.ini", "markov_chain.ini",
                                  "moving_average.ini", "constant.ini"])
def test_bundled_configs_parse(name):
    from gclab.config import parse_config

    parse_config((CONFIG_DIR / name).read_text())
