import json
import math

import numpy as np
import pytest

from inflowqw import cli
from inflowqw.errors import NumericError
from inflowqw.export import (
    dumps_json,
    export_series,
    format_float,
    jsonable,
    read_series_csv,
    series_to_csv,
    write_text,
)
from inflowqw.reduced import reduced_series
from inflowqw.series import TimeSeries


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_simulate_default_horizon(capsys):
    code, out, _ = run_cli(capsys, "simulate", "--n", "100")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "t,nu_marked,nu_unmarked,norm_kn"
    assert len(lines) == 1 + int(math.floor(100 * math.log(100))) + 1
    assert lines[1] == "0,nan,nan,0"


def test_simulate_csv_is_byte_identical(tmp_path):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for p in paths:
        assert cli.main(["simulate", "--n", "30", "--t-max", "90", "-o", str(p)]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()
    assert b"\r" not in paths[0].read_bytes()


def test_simulate_and_reduced_agree(tmp_path):
    a, b = tmp_path / "full.csv", tmp_path / "red.csv"
    assert cli.main(["simulate", "--n", "40", "--t-max", "120", "-o", str(a)]) == 0
    assert cli.main(["reduced", "--n", "40", "--t-max", "120", "-o", str(b)]) == 0
    sa, sb = read_series_csv(a), read_series_csv(b)
    np.testing.assert_allclose(sa.nu_marked, sb.nu_marked, atol=1e-9, equal_nan=True)
    np.testing.assert_allclose(sa.norm_kn, sb.norm_kn, rtol=1e-9)


def test_mixing_time_json(capsys):
    code, out, _ = run_cli(capsys, "mixing-time", "--n", "100", "--theta", "3")
    assert code == 0
    doc = json.loads(out)
    assert {"command", "params", "results", "method", "tool_version"} <= set(doc)
    assert doc["command"] == "mixing-time"
    assert doc["method"] == "closed-form"
    res = doc["results"]
    for key in ("n", "theta", "t_theta", "horizon", "converged"):
        assert key in res
    assert res["converged"] is True and res["t_theta"] == 370


def test_mixing_time_csv(capsys):
    code, out, _ = run_cli(capsys, "mixing-time", "--n", "50", "--format", "csv")
    assert code == 0
    assert out.splitlines()[0] == "n,theta,t_theta,horizon,converged"


def test_spectrum_json(capsys):
    code, out, _ = run_cli(capsys, "spectrum", "--n", "100", "--eps-list",
                           "0.001,0.002,0.004,0.006,0.01")
    assert code == 0
    res = json.loads(out)["results"]
    re_, im_ = res["eigenvalues"]["plus1_pos"]
    assert im_ > 0 and res["spectral_radius"] < 1
    c2 = res["fits"]["minus1"]["coeff2"]
    assert abs(complex(*c2) - 0.5) < 1e-2


def test_spectrum_csv(capsys):
    code, out, _ = run_cli(capsys, "spectrum", "--format", "csv")
    assert code == 0
    assert out.splitlines()[0] == "branch,re,im,modulus"
    assert len(out.splitlines()) == 4


def test_pulsation_outputs(tmp_path, capsys):
    summ = tmp_path / "s.json"
    code, out, _ = run_cli(capsys, "pulsation", "--n", "100", "--summary", str(summ))
    assert code == 0
    assert out.splitlines()[0] == "t,nu_marked,nu_smoothed,nu_formula,nu_profile"
    res = json.loads(summ.read_text())["results"]
    assert 19 <= res["first_peak"] <= 26


def test_sweep_mixing(capsys):
    code, out, _ = run_cli(capsys, "sweep", "--n-list", "50,100", "--theta", "3",
                           "--jobs", "1", "--format", "json")
    assert code == 0
    res = json.loads(out)["results"]
    assert [r["t_theta"] for r in res["rows"]] == [172, 370]
    assert {"mean_ratio", "fitted_ratio", "max_relative_spread", "superlinear"} <= set(res)


@pytest.mark.parametrize("what", ["limit", "pulsation", "spectrum"])
def test_sweep_other_commands(capsys, what):
    code, out, _ = run_cli(capsys, "sweep", "--command", what, "--n-list", "100,200",
                           "--jobs", "2")
    assert code == 0
    lines = out.splitlines()
    assert len(lines) == 3 and lines[0].startswith("n,")


def test_simulate_summary(tmp_path, capsys):
    summ = tmp_path / "sum.json"
    code, _, _ = run_cli(capsys, "simulate", "--n", "20", "--t-max", "40", "--summary", str(summ))
    assert code == 0
    doc = json.loads(summ.read_text())
    assert doc["method"] == "full"
    assert doc["results"]["rows"] == 41
    assert doc["results"]["stationary_nu_marked"] == pytest.approx(0.5, abs=1e-12)


@pytest.mark.parametrize("argv", [
    ["simulate", "--n", "2"],
    ["simulate", "--n", "5", "--marked", "5"],
    ["mixing-time", "--theta", "-1"],
    ["mixing-time", "--horizon-factor", "1"],
    ["pulsation", "--n", "100", "--t-max", "50"],
    ["spectrum", "--eps-list", "0.5,0.01"],
    ["sweep", "--n-list", "2,100"],
])
def test_usage_errors_exit_2(capsys, argv):
    code, _, err = run_cli(capsys, *argv)
    assert code == 2
    assert "error" in err


def test_argparse_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["simulate", "--n", "abc"])
    assert exc.value.code == 2


def test_numeric_failure_exit_3(capsys, monkeypatch):
    def boom(*a, **k):
        raise NumericError("singular")
    monkeypatch.setattr(cli, "mixing_time", boom)
    code, _, err = run_cli(capsys, "mixing-time", "--n", "10")
    assert code == 3 and "numeric" in err


def test_io_failure_exit_4(tmp_path, capsys):
    target = tmp_path / "missing" / "out.csv"
    code, _, err = run_cli(capsys, "reduced", "--n", "10", "--t-max", "5", "-o", str(target))
    assert code == 4
    assert str(target) in err
    assert not target.exists()


def test_config_precedence(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"n": 20, "t-max": 7}))
    code, out, _ = run_cli(capsys, "--config", str(cfg), "reduced")
    assert code == 0 and len(out.splitlines()) == 9
    code, out, _ = run_cli(capsys, "--config", str(cfg), "reduced", "--t-max", "3")
    assert code == 0 and len(out.splitlines()) == 5


@pytest.mark.parametrize("content", ['{"n": 20, "bogus": 1}', "[1, 2]", "{not json"])
def test_config_rejected(tmp_path, capsys, content):
    cfg = tmp_path / "c.json"
    cfg.write_text(content)
    code, _, _ = run_cli(capsys, "--config", str(cfg), "reduced")
    assert code == 2


def test_missing_config_is_io_error(tmp_path, capsys):
    code, _, _ = run_cli(capsys, "--config", str(tmp_path / "nope.json"), "reduced")
    assert code == 4


# --- export ---------------------------------------------------------------------

def test_format_float_round_trips():
    for x in (0.1, 1 / 3, 1e-300, -2.5e17, 0.5):
        assert float(format_float(x)) == x


def test_jsonable_handles_complex_and_nan():
    doc = jsonable({"z": 1 + 2j, "v": np.array([np.nan, 1.0]), "k": np.int64(3)})
    assert doc == {"z": [1.0, 2.0], "v": [None, 1.0], "k": 3}
    assert json.loads(dumps_json({"a": float("nan")})) == {"a": None}


def _empty_series():
    e = np.array([])
    return TimeSeries(n_vertices=5, method="test", t=e.astype(int), nu_marked=e,
                      nu_unmarked=e, norm_kn=e)


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_empty_series_is_refused(tmp_path, fmt):
    target = tmp_path / f"empty.{fmt}"
    with pytest.raises(ValueError):
        export_series(_empty_series(), fmt, target)
    assert not target.exists()


def test_csv_round_trip_byte_identical(tmp_path):
    s = reduced_series(50, 120)
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    export_series(s, "csv", p1)
    back = read_series_csv(p1, 50)
    write_text(series_to_csv(back), p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_json_export(tmp_path):
    s = reduced_series(10, 4)
    p = tmp_path / "s.json"
    export_series(s, "json", p)
    doc = json.loads(p.read_text())
    assert doc["n"] == 10 and doc["nu_marked"][0] is None and len(doc["t"]) == 5


def test_read_rejects_foreign_header(tmp_path):
    p = tmp_path / "x.csv"
    p.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        read_series_csv(p)


def test_figure_dataset_terminal_value(tmp_path):
    p = tmp_path / "fig.csv"
    assert cli.main(["simulate", "--n", "100", "--t-max", "460", "-o", str(p)]) == 0
    s = read_series_csv(p, 100)
    assert len(s) == 461
    assert abs(s.nu_marked[-1] - 0.5) < math.exp(-1)
    assert abs(s.nu_marked[-1] - 0.5) < 0.05
