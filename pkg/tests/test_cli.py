import json

import pytest
import yaml

from lobsim.cli import main
from lobsim.config import config_hash, load_config
from lobsim.errors import ConfigError


def write_cfg(path, cfg):
    path.write_text(yaml.safe_dump(cfg))
    return str(path)


def pk1_cfg(outdir, **sim):
    simulation = {"max_events": 10, "seed": 7}
    simulation.update(sim)
    return {
        "model": {"name": "poisson_k1", "lam": 1.0, "mu": 2.0, "theta": 0.5},
        "simulation": simulation,
        "output": {"directory": str(outdir)},
    }


def test_load_config_defaults_and_hash(tmp_path):
    cfg = load_config(pk1_cfg(tmp_path / "o"))
    assert cfg.analysis["z_grid"] == [1.05, 1.1, 1.2]
    assert cfg.book["K"] == 1
    assert cfg.hash == config_hash(cfg.raw)
    assert len(cfg.hash) == 16


def test_load_config_violations_are_collected(tmp_path):
    bad = pk1_cfg(tmp_path / "o")
    bad["model"]["lam"] = 3.0
    bad["simulation"] = {"n_paths": 0}
    with pytest.raises(ConfigError) as exc:
        load_config(bad)
    msgs = exc.value.violations
    assert "λ < μ required" in msgs
    assert any("max_events" in m for m in msgs)
    assert any("n_paths" in m for m in msgs)


def test_simulate_smoke(tmp_path):
    cfg = write_cfg(tmp_path / "c.yaml", pk1_cfg(tmp_path / "out"))
    assert main(["simulate", cfg]) == 0
    rows = (tmp_path / "out" / "events_0000.csv").read_text().splitlines()
    assert len(rows) == 11  # header + 10 events
    summary = json.loads((tmp_path / "out" / "summary_0000.json").read_text())
    assert summary["n_events"] == 10
    assert summary["header"]["seed"] == 7
    assert summary["header"]["version"]


def test_simulate_invalid_params_exit_2(tmp_path, capsys):
    c = pk1_cfg(tmp_path / "out")
    c["model"]["lam"] = 3.0
    cfg = write_cfg(tmp_path / "c.yaml", c)
    assert main(["simulate", cfg]) == 2
    assert "λ < μ required" in capsys.readouterr().err


def test_simulate_byte_identical_reruns(tmp_path):
    cfg = write_cfg(tmp_path / "c.yaml", pk1_cfg(tmp_path / "out"))
    main(["simulate", cfg, "--output-dir", str(tmp_path / "a")])
    main(["simulate", cfg, "--output-dir", str(tmp_path / "b")])
    for name in ["events_0000.csv", "summary_0000.json"]:
        fa = (tmp_path / "a" / name).read_bytes()
        fb = (tmp_path / "b" / name).read_bytes()
        assert fa == fb


def test_seed_override_changes_output(tmp_path):
    cfg = write_cfg(tmp_path / "c.yaml", pk1_cfg(tmp_path / "out"))
    main(["simulate", cfg, "--output-dir", str(tmp_path / "a"), "--seed", "1"])
    main(["simulate", cfg, "--output-dir", str(tmp_path / "b"), "--seed", "2"])
    assert (tmp_path / "a" / "events_0000.csv").read_text() != (
        tmp_path / "b" / "events_0000.csv"
    ).read_text()


def test_check_zoo_default_exit_0(tmp_path):
    c = pk1_cfg(tmp_path / "out")
    c["analysis"] = {"scan_cap": 12}
    cfg = write_cfg(tmp_path / "c.yaml", c)
    assert main(["check", cfg]) == 0
    payload = json.loads((tmp_path / "out" / "check.json").read_text())
    assert payload["assumptions"]["assumptions"]["9"]["status"] == "verified-on-scan"
    assert all(not cert["violated"] for cert in payload["certificates"])


def test_check_unstable_queue_reactive_exit_4(tmp_path):
    c = {
        "model": {
            "name": "queue_reactive",
            "K": 1,
            "lam_tables": [[2.0, 2.0, 2.0]],
            "mu_tables": [[0.0, 0.5, 0.5]],
            "theta": 0.4,
        },
        "simulation": {"max_events": 10, "seed": 0},
        "analysis": {"scan_cap": 12},
        "output": {"directory": str(tmp_path / "out")},
    }
    cfg = write_cfg(tmp_path / "c.yaml", c)
    assert main(["check", cfg]) == 4
    payload = json.loads((tmp_path / "out" / "check.json").read_text())
    assert payload["assumptions"]["assumptions"]["4"]["status"] == "violated"


def test_scaling_symmetric_exit_0(tmp_path):
    c = pk1_cfg(tmp_path / "out", max_events=100_000, n_paths=100)
    c["analysis"] = {"symmetric": True, "n_grid": [500], "t_grid": [1.0]}
    cfg = write_cfg(tmp_path / "c.yaml", c)
    assert main(["scaling", cfg]) == 0
    payload = json.loads((tmp_path / "out" / "scaling.json").read_text())
    assert payload["report"]["sigma2_event"] > 0
    assert (tmp_path / "out" / "rescaled_terminal.csv").exists()
    assert (tmp_path / "out" / "autocovariance.csv").exists()


def test_scaling_asymmetric_declared_symmetric_exit_5(tmp_path):
    # constant u with d = 0 forces every price move up: positive drift
    c = {
        "model": {
            "name": "poisson_k1",
            "lam": 1.0,
            "mu": 2.0,
            "theta": 0.5,
            "ud_constant": [0.5, 0.0],
        },
        "simulation": {"max_events": 60_000, "seed": 0, "n_paths": 5},
        "analysis": {"symmetric": True, "n_grid": [500], "t_grid": [1.0]},
        "output": {"directory": str(tmp_path / "out")},
    }
    cfg = write_cfg(tmp_path / "c.yaml", c)
    assert main(["scaling", cfg]) == 5


def test_oracle_exit_codes(tmp_path):
    c = pk1_cfg(tmp_path / "out", max_events=200_000, burn_in=20_000)
    c["analysis"] = {"oracle_cap": 20, "price_mode": "frozen"}
    cfg = write_cfg(tmp_path / "c.yaml", c)
    assert main(["oracle", cfg]) == 0
    payload = json.loads((tmp_path / "out" / "oracle.json").read_text())
    assert payload["tv_distance"] < 0.05
    assert payload["header"]["config_hash"] == config_hash(c)

    c2 = {
        "model": {
            "name": "zero_intelligence",
            "K": 3,
            "lam_by_distance": [0.8] * 8,
            "mu_by_distance": [0.4] * 8,
            "gamma": 0.3,
            "theta": [0.1, 0.2, 0.3, 0.4, 0.5, 0.6],
        },
        "simulation": {"max_events": 10, "seed": 0},
        "analysis": {"oracle_cap": 8, "state_bound": 1000},
        "output": {"directory": str(tmp_path / "out2")},
    }
    cfg2 = write_cfg(tmp_path / "c2.yaml", c2)
    assert main(["oracle", cfg2]) == 6


def test_oracle_degenerate_cap_zero(tmp_path):
    c = pk1_cfg(tmp_path / "out", max_events=1000)
    c["analysis"] = {"oracle_cap": 0, "price_mode": "frozen"}
    cfg = write_cfg(tmp_path / "c.yaml", c)
    assert main(["oracle", cfg]) == 0
    payload = json.loads((tmp_path / "out" / "oracle.json").read_text())
    assert payload["tv_distance"] == pytest.approx(0.0)
