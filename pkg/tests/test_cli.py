import importlib.resources
import json
import os
import subprocess
import sys

import numpy as np
import pytest

from delaypred import read_container


def run_cli(*argv, cwd=None, env_extra=None):
    env = dict(os.environ)
    env.pop("HPL_THREADS", None)
    if env_extra:
        env.update(env_extra)
    return subprocess.run([sys.executable, "-m", "delaypred", *argv],
                          capture_output=True, text=True, cwd=cwd, env=env)


def _packaged_config() -> dict:
    text = (importlib.resources.files("delaypred") / "configs" / "fig2.cfg").read_text()
    return json.loads(text)


@pytest.fixture
def short_config(tmp_path):
    """Packaged demo config with the run shortened to keep tests fast."""
    cfg = _packaged_config()
    cfg["sim"]["T"] = 2.0
    path = tmp_path / "short.cfg"
    path.write_text(json.dumps(cfg))
    return str(path)


# --------------------------------------------------------------------------
# parser basics

def test_help_exits_zero():
    r = run_cli("--help")
    assert r.returncode == 0
    assert "check-delay" in r.stdout and "simulate" in r.stdout


def test_no_subcommand_is_usage_error():
    r = run_cli()
    assert r.returncode == 1


def test_unknown_flag_is_usage_error():
    r = run_cli("check-delay", "--bogus")
    assert r.returncode == 1


def test_bad_config_json_exits_one(tmp_path):
    bad = tmp_path / "broken.cfg"
    bad.write_text("{ not json")
    r = run_cli("check-delay", "--config", str(bad))
    assert r.returncode == 1


def test_bad_threads_env_exits_one(tmp_path):
    r = run_cli("gen-dataset", "--n", "2", "--resolution", "16",
                "--out", str(tmp_path / "x.nopc"),
                env_extra={"HPL_THREADS": "abc"})
    assert r.returncode == 1


# --------------------------------------------------------------------------
# check-delay

def test_check_delay_default_config():
    r = run_cli("check-delay")
    assert r.returncode == 0
    lines = r.stdout.splitlines()
    assert lines[0].startswith("d1: pi0* = ")
    assert "[ok]" in lines[0] and "[ok]" in lines[1]


def test_check_delay_violation_exits_two(tmp_path):
    cfg = _packaged_config()
    cfg["delays"]["d1"]["alpha"] = 0.3
    cfg["delays"]["d1"]["omega"] = 5.0
    path = tmp_path / "bad.cfg"
    path.write_text(json.dumps(cfg))
    r = run_cli("check-delay", "--config", str(path))
    assert r.returncode == 2
    assert "VIOLATED" in r.stdout


# --------------------------------------------------------------------------
# horizon

def test_horizon_euler_writes_csv_and_figure(tmp_path):
    out = tmp_path / "h.csv"
    r = run_cli("horizon", "--method", "euler", "--h", "0.01", "--T", "2",
                "--out", str(out))
    assert r.returncode == 0
    assert "method = euler" in r.stdout and "max residual" in r.stdout
    header = out.read_text().splitlines()[0]
    assert header == "t,psi,residual"
    assert (tmp_path / "h.png").exists()


def test_horizon_no_plot_skips_figure(tmp_path):
    out = tmp_path / "h.csv"
    r = run_cli("horizon", "--method", "oracle", "--T", "2",
                "--out", str(out), "--no-plot")
    assert r.returncode == 0
    assert out.exists()
    assert not (tmp_path / "h.png").exists()


def test_horizon_fno_requires_weights(tmp_path):
    r = run_cli("horizon", "--method", "fno", "--T", "2",
                "--out", str(tmp_path / "h.csv"))
    assert r.returncode == 1


def test_horizon_missing_weight_file_exits_four(tmp_path):
    r = run_cli("horizon", "--method", "fno", "--T", "2",
                "--weights", str(tmp_path / "absent.nopc"),
                "--out", str(tmp_path / "h.csv"))
    assert r.returncode == 4


def test_horizon_grid_mismatch_exits_three(tmp_path):
    r = run_cli("horizon", "--method", "euler", "--h", "0.07", "--T", "1",
                "--out", str(tmp_path / "h.csv"), "--no-plot")
    assert r.returncode == 3


# --------------------------------------------------------------------------
# gen-dataset

def test_gen_dataset_cli(tmp_path):
    out = tmp_path / "ds.nopc"
    r = run_cli("gen-dataset", "--n", "6", "--seed", "2",
                "--resolution", "32", "--H", "6", "--out", str(out))
    assert r.returncode == 0
    assert "wrote" in r.stdout
    meta, tensors = read_container(out)
    assert meta["n_samples"] == 6
    assert tensors["psi"].shape == (6, 32)


def test_gen_dataset_threads_env_same_bytes(tmp_path):
    a = tmp_path / "a.nopc"
    b = tmp_path / "b.nopc"
    r1 = run_cli("gen-dataset", "--n", "6", "--resolution", "32", "--H", "6",
                 "--threads", "1", "--out", str(a))
    r2 = run_cli("gen-dataset", "--n", "6", "--resolution", "32", "--H", "6",
                 "--out", str(b), env_extra={"HPL_THREADS": "2"})
    assert r1.returncode == 0 and r2.returncode == 0
    assert a.read_bytes() == b.read_bytes()


def test_gen_dataset_unwritable_out_exits_four(tmp_path):
    r = run_cli("gen-dataset", "--n", "2", "--resolution", "16",
                "--out", str(tmp_path / "no-such-dir" / "x.nopc"))
    assert r.returncode == 4


# --------------------------------------------------------------------------
# simulate

def test_simulate_short_run(tmp_path, short_config):
    out = tmp_path / "trace.csv"
    r = run_cli("simulate", "--config", short_config, "--out", str(out))
    assert r.returncode == 0
    assert "gamma(0) = " in r.stdout and "fit: M = " in r.stdout
    assert "noncausal clamped lookups: 0" in r.stdout
    assert out.exists()
    assert (tmp_path / "trace.png").exists()
    header = out.read_text().splitlines()[0]
    assert header.startswith("t,Z_1,Z_2,")


def test_simulate_psi_offset_counts_clamps(tmp_path, short_config):
    out = tmp_path / "trace.csv"
    r = run_cli("simulate", "--config", short_config, "--out", str(out),
                "--psi-offset", "0.02", "--no-plot")
    assert r.returncode == 0
    line = [l for l in r.stdout.splitlines() if "clamped lookups" in l][0]
    assert int(line.rsplit(":", 1)[1]) > 0


def test_simulate_euler_method_override(tmp_path, short_config):
    out = tmp_path / "trace.csv"
    r = run_cli("simulate", "--config", short_config, "--out", str(out),
                "--method", "euler", "--h", "0.01", "--no-plot")
    assert r.returncode == 0
    text = out.read_text().splitlines()
    assert len(text) == 2002  # header + 2001 samples at dt = 1e-3


def test_simulate_fno_requires_weights(tmp_path, short_config):
    r = run_cli("simulate", "--config", short_config, "--method", "fno",
                "--out", str(tmp_path / "t.csv"), "--no-plot")
    assert r.returncode == 1


# --------------------------------------------------------------------------
# margins

def test_margins_cli(tmp_path):
    out = tmp_path / "margins.csv"
    r = run_cli("margins", "--out", str(out))
    assert r.returncode == 0
    assert "feasible: yes" in r.stdout
    lines = out.read_text().splitlines()
    assert lines[0] == "name,value"
    rows = dict(l.split(",", 1) for l in lines[1:])
    assert float(rows["eps_star"]) > 0
    assert rows["feasible"] == "1"
    assert (tmp_path / "margins.png").exists()


# --------------------------------------------------------------------------
# bench

def test_bench_cli(tmp_path):
    out = tmp_path / "bench.csv"
    r = run_cli("bench", "--methods", "oracle,euler", "--h", "0.05",
                "--T", "2", "--n-delays", "2", "--out", str(out), "--no-plot")
    assert r.returncode == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "method,n,mean_ms,p50_ms,p95_ms,mean_residual,failures"
    assert len(lines) == 3
    assert "oracle" in r.stdout and "euler" in r.stdout
