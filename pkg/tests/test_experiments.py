import csv
import io
import subprocess
import sys

import numpy as np
import pytest

from cskct import experiments as ex
from cskct.cli import main
from cskct.errors import ConfigError, NumericalError

from reference_values import DESIGN_TABLE


def _table(text):
    body = [line for line in text.splitlines() if not line.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(body))))


def _design_values(text, quantity):
    return [float(r["value"]) for r in _table(text) if r["quantity"] == quantity]


def test_defaults_match_reference_parameters():
    cfg = ex.ExperimentConfig()
    p = cfg.params()
    assert (p.D, p.r, p.t_sym, p.dt) == (79.4, 5.0, 21.12, 0.32)
    assert cfg.topology().K == 12


def test_parse_config_comments_and_overrides():
    cfg = ex.parse_config("""
        # a comment
        M=4          # trailing comment
        rho = 1.24
        scheme=csk-ct
    """)
    assert (cfg.M, cfg.rho) == (4, 1.24)
    cfg = ex.parse_config("rho=2", cfg)
    assert cfg.rho == 2.0 and cfg.M == 4


def test_load_config_file_then_flags(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("M=4\nrho=1.5\nseed=9\n")
    cfg = ex.load_config(str(path), ["rho=2.0"])
    assert (cfg.M, cfg.rho, cfg.seed) == (4, 2.0, 9)
    with pytest.raises(ConfigError):
        ex.load_config(str(tmp_path / "missing.cfg"))


@pytest.mark.parametrize("text", ["nonsense", "colour=blue", "M=3", "rho=abc", "scheme=ook"])
def test_bad_config_raises(text):
    with pytest.raises(ConfigError):
        ex.parse_config(text)


def test_d_bar_derives_y_max_and_k():
    cfg = ex.parse_config("d_bar_um=13.5")
    topo = cfg.topology()
    assert cfg.y_max == 21.0
    assert topo.K == 16 and topo.isi_memory == 15
    # the later of y_max / d_bar wins when given as separate overrides
    assert cfg.replace(y_max_um="19").d_bar == 12.5
    # within one file d_bar is applied last
    assert ex.parse_config("d_bar_um=12\ny_max_um=21").y_max == 18.0


def test_explicit_memory_and_k():
    cfg = ex.parse_config("k_memory=0\nK=4")
    topo = cfg.topology()
    assert topo.K == 4 and topo.isi_memory == 0
    np.testing.assert_allclose(topo.distances, np.linspace(6, 17, 4))


def test_out_of_range_values_only_warn(caplog):
    cfg = ex.parse_config("t_sym_s=40")
    assert cfg.warn_outside_ranges()
    assert "outside" in caplog.text


def test_cmd_design_reference_row():
    cfg = ex.parse_config("d_bar_um=13.5\nrho=1\nM=4")
    report, text = ex.cmd_design(cfg)
    np.testing.assert_allclose(_design_values(text, "Q"), [1000, 3025, 9151, 27681], atol=1)
    np.testing.assert_allclose(_design_values(text, "tau"), [789, 1633, 4188], rtol=0.02)
    assert "gamma" in report and "27681" in report


def test_cmd_design_bcsk_with_scaling():
    _, text = ex.cmd_design(ex.parse_config("d_bar_um=12\nrho=1.24\nM=2"))
    gamma, q2, tau2, *_ = DESIGN_TABLE[(12.0, 1.24)]
    assert _design_values(text, "Q")[1] == pytest.approx(q2[1], abs=1)
    assert _design_values(text, "tau")[0] == pytest.approx(tau2[0], rel=0.02)
    assert _design_values(text, "gamma")[0] == pytest.approx(gamma, abs=5e-4)


def test_cmd_design_benchmark_uses_given_levels():
    cfg = ex.parse_config("scheme=benchmark\nM=2\nQ_levels=900,2000")
    _, text = ex.cmd_design(cfg)
    assert _design_values(text, "Q") == [900.0, 2000.0]
    taus = [r for r in _table(text) if r["quantity"] == "tau"]
    assert len(taus) == 12 and {r["tx_index"] for r in taus} == {str(k) for k in range(12)}
    with pytest.raises(ConfigError):
        ex.cmd_design(cfg.replace(Q_levels="1,2,3"))


def test_gamma_sweep_schema_and_shape():
    text = ex.cmd_gamma_sweep([1.28 * n for n in range(1, 26)], [17, 18, 19, 20, 21])
    body = [line for line in text.splitlines() if not line.startswith("#")]
    assert body[0] == "t_sym_s,y_max_um,gamma"
    rows = _table(text)
    assert len(rows) == 125
    g = np.array([float(r["gamma"]) for r in rows]).reshape(5, 25)
    assert np.all(np.diff(g, axis=1) < 0)
    assert np.all(np.diff(g, axis=0) > 0)


def test_complexity_counts():
    rows = {(r["K"], r["scheme"], r["M"]): (int(r["threshold_count"]), int(r["cir_count"]))
            for r in _table(ex.cmd_complexity([1, 16], [2, 4]))}
    assert rows[("16", "csk-ct", "4")] == (3, 2)
    assert rows[("16", "benchmark", "4")] == (48, 16)
    assert rows[("1", "csk-ct", "4")][0] == rows[("1", "benchmark", "4")][0] == 3


def test_ser_sweep_flags_infeasible_points():
    spec = ex.SweepSpec("rho", ("1", "1.01", "1.5"), ex.parse_config("Q0=1\nM=4\nk_memory=0"))
    rows = _table(ex.cmd_ser(spec))
    assert [r["status"] for r in rows] == ["ok", "infeasible", "ok"]
    assert rows[1]["p_error"] == ""
    assert float(rows[0]["p_error"]) > float(rows[2]["p_error"])


def test_ser_sweep_keeps_value_order():
    vals = ("13.5", "11.5", "12.5")
    spec = ex.SweepSpec("d_bar", vals, ex.parse_config("rho=1.36\nworkers=3"))
    rows = _table(ex.cmd_ser(spec))
    assert [r["d_bar_um"] for r in rows] == list(vals)
    assert rows[0]["scheme"] == "csk-ct"


def test_ser_rises_with_symbol_time_without_isi():
    grid = tuple(str(round(1.28 * n, 2)) for n in range(1, 26))
    spec = ex.SweepSpec("t_sym", grid, ex.parse_config("d_bar_um=11.5\nrho=1.24\nM=2\nk_memory=0"))
    p = np.array([float(r["p_error"]) for r in _table(ex.cmd_ser(spec))])
    assert np.all(np.diff(p) >= 0)


def test_ser_with_montecarlo_columns():
    spec = ex.SweepSpec("M", ("2",), ex.parse_config("k_memory=0\nrounds=2000"))
    row = _table(ex.cmd_ser(spec, montecarlo=True))[0]
    assert float(row["ci_lo"]) <= float(row["ser_montecarlo"]) <= float(row["ci_hi"])


def test_sweep_spec_rejects_unknown_parameter():
    with pytest.raises(ConfigError):
        ex.SweepSpec("D", ("1",))


def test_montecarlo_csv_reproducible_and_self_describing():
    cfg = ex.parse_config("M=4\nrounds=3000\nseed=5")
    a = ex.cmd_montecarlo(cfg, workers=1)
    b = ex.cmd_montecarlo(cfg, workers=4)
    assert a == b
    assert ex.config_from_header(a) == cfg.replace(d_bar_um=cfg.d_bar, K=12, k_memory=11)
    assert ex.cmd_montecarlo(ex.config_from_header(a)) == a
    rows = _table(a)
    assert {r["source"] for r in rows} == {"analytic", "montecarlo"}
    assert list(rows[0]) == list(ex.SIM_COLUMNS)


def test_timestamp_is_opt_in():
    cfg = ex.ExperimentConfig()
    assert "generated" not in ex.cmd_cir_dump(cfg)
    assert "# generated" in ex.cmd_cir_dump(cfg, timestamp=True)


def test_cir_dump_rows():
    cfg = ex.parse_config("k_memory=3")
    rows = _table(ex.cmd_cir_dump(cfg))
    assert len(rows) == 12 * 4 + 4
    first = rows[0]
    assert (first["tx_index"], float(first["y_um"]), first["period"]) == ("0", 6.0, "1")
    assert float(first["h"]) == pytest.approx(0.41703778904045965, rel=1e-12)
    avg = [float(r["h"]) for r in rows if r["tx_index"] == "avg"]
    assert 0.1748 < avg[0] < 0.4170


def test_cli_exit_codes(tmp_path, capsys):
    out = tmp_path / "d.csv"
    assert main(["design", "-s", "d_bar_um=13.5", "-s", "M=4", "-o", str(out)]) == 0
    assert out.read_text().startswith("# cskct design")
    assert main(["design", "-s", "rho=0.5"]) == 2
    assert main(["design", "-s", "rho=abc"]) == 2
    assert main(["design", "-s", "Q0=1", "-s", "rho=1.01", "-s", "M=4"]) == 3
    assert "infeasible" in capsys.readouterr().err


def test_cli_numerical_failure_exit(monkeypatch):
    def boom(*a, **k):
        raise NumericalError("quadrature did not converge")
    monkeypatch.setattr(ex, "cmd_cir_dump", boom)
    assert main(["cir-dump"]) == 4


def test_cli_subcommands_write_csv(tmp_path):
    for cmd in (["gamma-sweep", "--t-sym", "1.28,2.56", "--y-max", "17"],
                ["complexity", "--K", "1,2"],
                ["ser", "--vary", "rho", "--values", "1,1.2"],
                ["cir-dump"],
                ["montecarlo", "-s", "rounds=500"]):
        out = tmp_path / f"{cmd[0]}.csv"
        assert main(cmd + ["-o", str(out)]) == 0
        assert out.read_text().startswith(f"# cskct {cmd[0]}")


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "cskct", "complexity", "--K", "3", "--M", "2"],
                          capture_output=True, text=True, check=True)
    assert "3,benchmark,2,3,3" in proc.stdout
