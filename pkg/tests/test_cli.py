"""Config validation, CLI exit codes, report determinism."""

import os
import shutil
import subprocess
import sys

import pytest
import yaml

from scaleflow.cli import main
from scaleflow.config import ConfigError, load_config, validate_config

CONFIG_DIR = os.path.join(os.path.dirname(__file__), "..", "configs")


def run_cli(args):
    return main(args)


def write_yaml(path, payload):
    with open(path, "w", encoding="utf-8") as handle:
        yaml.safe_dump(payload, handle)


BASE = {
    "seed": 0,
    "group": {"kind": "positive-multiplicative", "weight_param": 1.0},
    "action": {"variant": "diagonal-scaling", "exponents": [1]},
    "ladder": {"count": 6},
    "grid": {"rule": "gauss", "base_nodes": 128, "panel_order": 16,
             "max_nodes": 1 << 18},
}


def test_unknown_key_rejected(tmp_path):
    cfg = dict(BASE)
    cfg["actoin"] = {"variant": "diagonal-scaling"}
    path = tmp_path / "bad.yaml"
    write_yaml(path, cfg)
    data = load_config(str(path))
    with pytest.raises(ConfigError) as err:
        validate_config(data)
    assert "actoin" in str(err.value)


def test_nested_unknown_key_path(tmp_path):
    cfg = dict(BASE)
    cfg["grid"] = {"rule": "gauss", "nodes": 12}
    path = tmp_path / "bad.yaml"
    write_yaml(path, cfg)
    with pytest.raises(ConfigError) as err:
        validate_config(load_config(str(path)))
    assert "grid.'nodes'" in str(err.value)


def test_malformed_yaml_is_line_anchored(tmp_path):
    path = tmp_path / "broken.yaml"
    path.write_text("group: {kind: [unclosed\n  action: oops\n")
    with pytest.raises(ConfigError) as err:
        load_config(str(path))
    assert "line" in str(err.value)


def test_cli_config_error_exit_code(tmp_path):
    path = tmp_path / "broken.yaml"
    path.write_text("ladder: {count: 6\n")
    code = run_cli(["verify-action", "--config", str(path), "--out", str(tmp_path / "o")])
    assert code == 2


def test_cli_missing_config_exit_code(tmp_path):
    code = run_cli(["verify-action", "--config", str(tmp_path / "nope.yaml"),
                    "--out", str(tmp_path / "o")])
    assert code == 2


def test_cli_verify_action_passes(tmp_path):
    code = run_cli([
        "verify-action", "--config", os.path.join(CONFIG_DIR, "verify_action.yaml"),
        "--out", str(tmp_path / "out"),
    ])
    assert code == 0
    assert (tmp_path / "out" / "action_certificates.json").exists()
    assert (tmp_path / "out" / "action_summary.csv").exists()


def test_cli_homogeneity_negative_control(tmp_path):
    cfg = dict(BASE)
    cfg["ladder"] = {"values": [0.5, 0.25, 0.125]}
    cfg["grid"] = {"rule": "midpoint", "base_nodes": 256}
    # true factor for 1-d unit scaling is eps; declare eps^2 instead
    cfg["homogenizer"] = {"measure": "lebesgue", "factor_override": 2.0}
    path = tmp_path / "wrong_factor.yaml"
    write_yaml(path, cfg)
    code = run_cli(["homogeneity", "--config", str(path), "--out", str(tmp_path / "o")])
    assert code == 1


def test_cli_resolution_failure_exit_code(tmp_path):
    cfg = yaml.safe_load(open(os.path.join(CONFIG_DIR, "sigma_periodic.yaml")))
    cfg["grid"]["max_nodes"] = 512
    cfg["ladder"] = {"count": 12}
    path = tmp_path / "under.yaml"
    write_yaml(path, cfg)
    code = run_cli(["sigma", "--config", str(path), "--out", str(tmp_path / "o")])
    assert code == 3


def test_cli_mean_runs(tmp_path):
    code = run_cli([
        "mean", "--config", os.path.join(CONFIG_DIR, "mean_periodic.yaml"),
        "--out", str(tmp_path / "out"),
    ])
    assert code == 0
    for name in ("mean.csv", "mean.json", "mean_error.dat"):
        assert (tmp_path / "out" / name).exists()


def test_cli_tol_override_forces_failure(tmp_path):
    code = run_cli([
        "mean", "--config", os.path.join(CONFIG_DIR, "mean_periodic.yaml"),
        "--out", str(tmp_path / "out"), "--tol-override", "rel=1e-18",
    ])
    assert code == 1


def test_cli_sigma_jobs_deterministic(tmp_path):
    outs = []
    for name, jobs in (("a", "1"), ("b", "2")):
        out = tmp_path / name
        code = run_cli([
            "sigma", "--config", os.path.join(CONFIG_DIR, "sigma_periodic.yaml"),
            "--out", str(out), "--jobs", jobs,
        ])
        assert code == 0
        outs.append(out)
    for name in sorted(os.listdir(outs[0])):
        with open(outs[0] / name, "rb") as fa, open(outs[1] / name, "rb") as fb:
            assert fa.read() == fb.read(), name


def test_reports_embed_header(tmp_path):
    out = tmp_path / "out"
    run_cli([
        "homogeneity", "--config", os.path.join(CONFIG_DIR, "homogeneity_r2.yaml"),
        "--out", str(out),
    ])
    text = (out / "homogeneity.csv").read_text()
    assert "# config_sha256:" in text
    assert "# version:" in text
    assert "# backend:" in text


def test_console_entry_point():
    result = subprocess.run(
        [sys.executable, "-m", "scaleflow.cli", "verify-action", "--config",
         os.path.join(CONFIG_DIR, "verify_action.yaml"), "--out",
         "/tmp/scaleflow-entry-test"],
        capture_output=True, text=True,
    )
    assert result.returncode == 0
    assert "PASS" in result.stdout
    shutil.rmtree("/tmp/scaleflow-entry-test", ignore_errors=True)
