import csv
import json
import subprocess
import sys

import pytest

from denguevc.cli import ScenarioConfig, config_from_mapping, main, run_scenario, sweep_rows
from denguevc.errors import ConfigError
from denguevc.params import BASELINE


def read_csv(path):
    return list(csv.reader(path.open()))


def kv(path):
    return {row[0]: row[1] for row in read_csv(path)[1:]}


def test_equilibrium_with_zero_configuration(tmp_path, capsys):
    assert main(["equilibrium", "--out", str(tmp_path)]) == 0
    values = kv(tmp_path / "equilibrium.csv")
    assert float(values["R0"]) == pytest.approx(1.74, abs=0.01)
    assert float(values["prevalence"]) == pytest.approx(1.04e-4, rel=0.02)
    assert float(values["lambda"]) == pytest.approx(2.59e-5, rel=0.02)
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["mode"] == "equilibrium" and "numpy" in manifest["versions"]
    assert "R0=1.739" in capsys.readouterr().out


def test_compare_strategies_ranking(tmp_path):
    assert main(["compare-strategies", "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "strategies.csv")[1:]
    assert [r[1] for r in rows] == ["adulticide", "bite-reduction", "source-reduction", "larvicide"]


def test_empty_config_fails_without_artifacts(tmp_path):
    cfg = tmp_path / "empty.yaml"
    cfg.write_text("")
    out = tmp_path / "out"
    assert main(["run", "--mode", "equilibrium", "--config", str(cfg), "--out", str(out)]) == 2
    assert not out.exists()


@pytest.mark.parametrize("text", ["mode: [", "bogus: 1", "mode: fly", "params: {zeta: 1}", "solver: {order: 3}"])
def test_malformed_configs_are_config_errors(tmp_path, text):
    cfg = tmp_path / "c.yaml"
    cfg.write_text(text)
    assert main(["equilibrium", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    assert not (tmp_path / "o").exists()


def test_model_error_exit_code_and_message(tmp_path, capsys):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("params:\n  r_H: 1.0e-6\n")
    assert main(["equilibrium", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 3
    assert "denguevc.equilibrium" in capsys.readouterr().err
    assert not (tmp_path / "o").exists()


def test_sweep_vertical_transmission(tmp_path):
    assert main(["sweep", "--param", "g", "--values", "0", "0.1", "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "sweep.csv")[1:]
    p0 = BASELINE.with_values(g=0.0)
    from denguevc import disease_free_populations
    d = disease_free_populations(p0)
    macdonald = (p0.a ** 2 * p0.b * p0.c * d.N_M / d.N_H0 * p0.gamma_M
                 / ((p0.mu_H + p0.alpha_H + p0.gamma_H) * (p0.mu_M + p0.gamma_M) * p0.mu_M))
    assert float(rows[0][2]) == pytest.approx(macdonald, rel=1e-14)
    assert float(rows[1][2]) == pytest.approx(1.74, abs=0.01)


def test_sweep_central_difference_matches_sensitivity():
    mu = BASELINE.mu_M
    rows = sweep_rows(BASELINE, "mu_M", [0.99 * mu, 1.01 * mu])
    elasticity = (rows[1][2] - rows[0][2]) / (0.02 * BASELINE.with_values(mu_M=mu).mu_M) * mu
    from denguevc.thresholds import threshold_report
    elasticity /= threshold_report(BASELINE).R0
    assert elasticity == pytest.approx(-2.35, abs=0.02)


def test_sweep_records_errors_and_keeps_order():
    rows = sweep_rows(BASELINE, "g", [0.1, 1.5, 0.0])
    assert rows[1][-1].startswith("DomainError") and rows[1][2] is None
    assert rows[0][2] == sweep_rows(BASELINE, "g", [0.1])[0][2]
    assert rows[2][2] == sweep_rows(BASELINE, "g", [0.0])[0][2]


def test_empty_sweep(tmp_path):
    assert main(["sweep", "--param", "a", "--values", "--out", str(tmp_path)]) == 0
    assert read_csv(tmp_path / "sweep.csv") == [["param", "value", "R0", "lambda", "prevalence", "error"]]


def test_identical_runs_are_byte_identical(tmp_path):
    cfg = tmp_path / "mc.yaml"
    cfg.write_text("sampler: {n_draws: 50}\nseed: 17\n")
    for d in ("a", "b"):
        assert main(["montecarlo", "--config", str(cfg), "--out", str(tmp_path / d)]) == 0
    for name in ("montecarlo_summary.csv", "montecarlo_draws.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    assert main(["montecarlo", "--config", str(cfg), "--seed", "18", "--out", str(tmp_path / "c")]) == 0
    assert (tmp_path / "a" / "montecarlo_draws.csv").read_bytes() != (tmp_path / "c" / "montecarlo_draws.csv").read_bytes()


def test_full_precision_numbers(tmp_path):
    run_scenario(ScenarioConfig(mode="equilibrium", out=str(tmp_path)))
    R0 = kv(tmp_path / "equilibrium.csv")["R0"]
    assert float(R0) == float(repr(float(R0))) and len(R0) > 12


def test_json_format(tmp_path):
    assert main(["run", "--mode", "sensitivity", "--format", "json", "--out", str(tmp_path)]) == 0
    records = json.loads((tmp_path / "sensitivity.json").read_text())
    assert len(records) == 12 and {"quantity", "param", "analytic", "oracle"} <= set(records[0])


def test_simulate_and_spatial_modes(tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("simulate: {t_end: 30}\nspatial: {shape: [4], t_end: 10, radius: 1.5}\n")
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "s")]) == 0
    assert len(read_csv(tmp_path / "s" / "trajectory.csv")) == 32
    assert main(["spatial", "--config", str(cfg), "--out", str(tmp_path / "p")]) == 0
    assert read_csv(tmp_path / "p" / "spatial_final.csv")[0][:2] == ["cell", "x"]


def test_config_mapping_validation():
    with pytest.raises(ConfigError):
        config_from_mapping({})
    with pytest.raises(ConfigError):
        config_from_mapping({"simulate": 3})
    cfg = config_from_mapping({"mode": "sweep", "sweep": {"param": "a", "values": [0.1]}})
    assert cfg.sweep.values == [0.1]


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "denguevc", "equilibrium", "--out", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and (tmp_path / "equilibrium.csv").exists()
