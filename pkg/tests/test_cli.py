"""Unit tests for the configuration parser, sweep runner, and CSV contract."""

import io
import json

import numpy as np
import pytest

from nvspin import cli
from nvspin.errors import ParseError, ValidationError

BASE_CFG = """\
model: seven-level-rate
seed: 42
output: {out}
pumping:
  pump_rate: 83.333
field:
  b_field: [0.0, 0.0, 5.0]
tensors:
  preset: 13Cb
  eta: 10.0
sweep:
  axis: R
  grid: [8.333, 83.33, 833.3]
engines: [analytic, numeric]
"""


def _config(tmp_path, text=None):
    out = tmp_path / "out.csv"
    return cli.parse_config((text or BASE_CFG).format(out=out)), out


def test_parse_config_roundtrip(tmp_path):
    cfg, out = _config(tmp_path)
    assert cfg.kind == "seven-level-rate"
    assert cfg.axis == "R"
    assert cfg.engines == ("analytic", "numeric")
    assert cfg.eta == 10.0
    assert cfg.output == str(out)
    assert list(cfg.grid) == [8.333, 83.33, 833.3]


def test_parse_config_yaml_error_has_location():
    with pytest.raises(ParseError) as err:
        cli.parse_config("model: [unclosed\nseed: 1")
    assert "line" in str(err.value)


def test_parse_config_rejects_unknown_keys(tmp_path):
    bad = BASE_CFG + "mystery: 1\n"
    with pytest.raises(ValidationError, match="mystery"):
        _config(tmp_path, bad)


def test_parse_config_validates_grid(tmp_path):
    bad = BASE_CFG.replace("[8.333, 83.33, 833.3]", "[8.333, 8.333]")
    with pytest.raises(ValidationError, match="monotone"):
        _config(tmp_path, bad)
    bad = BASE_CFG.replace("[8.333, 83.33, 833.3]", "[]")
    with pytest.raises(ValidationError):
        _config(tmp_path, bad)


def test_parse_config_preset_xor_inline(tmp_path):
    bad = BASE_CFG.replace(
        "  preset: 13Cb\n",
        "  preset: 13Cb\n  a_ground: [[1,0,0],[0,1,0],[0,0,1]]\n"
        "  a_excited: [[1,0,0],[0,1,0],[0,0,1]]\n")
    with pytest.raises(ValidationError):
        _config(tmp_path, bad)


def test_run_sweep_analytic_numeric_agree(tmp_path):
    cfg, out = _config(tmp_path)
    rows, status = cli.run_sweep(cfg)
    assert status == 0
    assert len(rows) == 6  # 3 grid points x 2 engines
    by_engine = {}
    for row in rows:
        by_engine.setdefault(row.sweep_value, {})[row.engine] = row
    for val, pair in by_engine.items():
        an, nu = pair["analytic"], pair["numeric"]
        assert nu.gamma_phi == pytest.approx(an.gamma_phi, rel=1e-10)
        assert nu.T2_us == pytest.approx(an.T2_us, rel=1e-10)
    assert out.exists()


def test_csv_roundtrip_exact(tmp_path):
    cfg, out = _config(tmp_path)
    rows, _ = cli.run_sweep(cfg)
    loaded = cli.load_rows(str(out))
    assert len(loaded) == len(rows)
    for got, want in zip(loaded, rows):
        assert got.engine == want.engine
        assert got.sweep_value == want.sweep_value  # repr round-trip is exact
        assert got.gamma_phi == want.gamma_phi
        assert got.T1_us == want.T1_us


def test_write_csv_headers_and_empty_cells():
    row = cli.ResultRow(sweep_name="R", sweep_value=1.0, engine="oracle")
    row.gamma_phi = 0.25
    row.flags = "oracle-relaxation-sum-only"
    buf = io.StringIO()
    cli.write_csv(buf, [row], timestamp="2026-01-01T00:00:00+00:00")
    lines = buf.getvalue().splitlines()
    assert lines[0].startswith("# units:")
    assert lines[1] == "# generated: 2026-01-01T00:00:00+00:00"
    assert lines[2] == ",".join(cli.CSV_COLUMNS)
    cells = lines[3].split(",")
    assert cells[:4] == ["R", "1.0", "oracle", "0.25"]
    assert cells[4] == ""  # unavailable rates stay empty, explained by flags
    assert cells[-1] == "oracle-relaxation-sum-only"


FAIL_CFG = """\
model: two-level
seed: 7
output: {out}
pumping:
  pump_rate: 83.333
field:
  b_field: [0.0, 1.0, 1.0]
tensors:
  preset: 13Cb
  eta: 10.0
sweep:
  axis: B_y
  grid: [1.0]
engines: [analytic, oracle]
oracle:
  n_paths: 2000
"""


def test_run_sweep_flags_failures(tmp_path):
    # oracle on a scenario whose hop budget is infeasible: the row is kept,
    # flagged, and the process exit status becomes 2
    cfg, _ = _config(tmp_path, FAIL_CFG)
    rows, status = cli.run_sweep(cfg)
    oracle_rows = [r for r in rows if r.engine == "oracle"]
    assert oracle_rows and all("failed:" in r.flags for r in oracle_rows)
    assert status == 2


def test_cli_rates_json(tmp_path, capsys):
    cfg_path = tmp_path / "cfg.yaml"
    cfg_path.write_text(BASE_CFG.format(out=tmp_path / "o.csv"))
    assert cli.main(["rates", "--config", str(cfg_path)]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["units"]["rates"] == "1/us"
    assert data["analytic"]["gamma_phi"] > 0
    assert data["numeric"]["gamma_phi"] == pytest.approx(
        data["analytic"]["gamma_phi"], rel=1e-10)


def test_cli_sweep_deterministic(tmp_path):
    cfg_path = tmp_path / "cfg.yaml"
    out = tmp_path / "o.csv"
    cfg_path.write_text(BASE_CFG.format(out=out))
    assert cli.main(["sweep", "--config", str(cfg_path)]) == 0
    first = [l for l in out.read_text().splitlines()
             if not l.startswith("# generated")]
    assert cli.main(["sweep", "--config", str(cfg_path)]) == 0
    second = [l for l in out.read_text().splitlines()
              if not l.startswith("# generated")]
    assert first == second


def test_cli_validate(tmp_path, capsys):
    cfg_path = tmp_path / "cfg.yaml"
    cfg_path.write_text(BASE_CFG.format(out=tmp_path / "o.csv"))
    assert cli.main(["validate", "--config", str(cfg_path)]) == 0
    assert "PASS" in capsys.readouterr().out


def test_cli_populations(tmp_path, capsys):
    cfg_path = tmp_path / "cfg.yaml"
    cfg_path.write_text(BASE_CFG.format(out=tmp_path / "o.csv"))
    assert cli.main(["populations", "--config", str(cfg_path)]) == 0
    out = capsys.readouterr().out
    assert "0_g" in out and "S" in out
