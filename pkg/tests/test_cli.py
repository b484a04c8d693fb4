import json

import numpy as np
import pytest

from entangled_pulses import cli
from entangled_pulses.model import derive_rates, reference_params
from entangled_pulses.propagators import Stage
from entangled_pulses.protocol import figure_schedule, run_point


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def csv_rows(text):
    lines = [l for l in text.splitlines() if l and not l.startswith("#")]
    header = lines[0].split(",")
    return [dict(zip(header, l.split(","))) for l in lines[1:]]


def test_rates_table(capsys):
    code, out, _ = run(capsys, "rates")
    assert code == 0
    rows = {r["name"]: r for r in csv_rows(out)}
    assert abs(float(rows["chi1"]["value"])) == pytest.approx(8333.333, rel=1e-6)
    assert rows["kbar_L"]["unit"] == "sqrt(rad/s)"
    assert "# check far_detuning_1: pass" in out


def test_rates_fail_check_exits_2(capsys, tmp_path):
    cfg = tmp_path / "near.cfg"
    cfg.write_text("delta1 = -10e6\ndelta2_override = -10e6\n")
    code, out, _ = run(capsys, "rates", "--config", str(cfg))
    assert code == 2
    assert ": fail" in out


def test_rates_json(capsys):
    code, out, _ = run(capsys, "rates", "--format", "json", "--chi", "exact")
    data = json.loads(out)
    assert code == 0 and data["chi_level"] == "exact"
    assert {d["status"] for d in data["diagnostics"]} == {"pass"}


def test_point_matches_library(capsys):
    code, out, _ = run(capsys, "point", "--format", "json", "--ratio", "0.8")
    assert code == 0
    data = json.loads(out)
    p = reference_params()
    rates = derive_rates(p)
    res = run_point(p, figure_schedule(rates, 40e-6, transfer_ratio=0.8), rates=rates)
    assert data["E_N"] == pytest.approx(res.report.E_N, rel=1e-12)
    assert np.array(data["V_out"]) == pytest.approx(res.V_out, rel=1e-12)
    assert data["physical"] and data["entangled"]


def test_point_csv_has_matrix_and_units(capsys):
    code, out, _ = run(capsys, "point", "--T1", "20e-6")
    (row,) = csv_rows(out)
    assert code == 0
    assert {"E_N", "Tm", "V11", "V44"} <= set(row)
    assert "# Tm: measurement window (s)" in out
    assert float(row["V13"]) == pytest.approx(float(row["V31"]))


def test_point_writes_file(capsys, tmp_path):
    target = tmp_path / "point.csv"
    code, out, _ = run(capsys, "point", "--out", str(target))
    assert code == 0 and out == "" and "E_N" in target.read_text()


def test_long_dark_time_gives_zero_entanglement(capsys):
    code, out, _ = run(capsys, "point", "--dark", "25e-3", "--format", "json")
    assert code == 0 and json.loads(out)["E_N"] == 0.0


def test_noiseless_flag_increases_entanglement(capsys):
    _, noisy, _ = run(capsys, "point", "--format", "json")
    _, clean, _ = run(capsys, "point", "--format", "json", "--noiseless")
    assert json.loads(clean)["E_N"] > json.loads(noisy)["E_N"]


def test_delta1_sign_override(capsys):
    _, neg, _ = run(capsys, "rates", "--format", "json")
    _, pos, _ = run(capsys, "rates", "--format", "json", "--delta1-sign", "positive")
    chi = lambda text: next(r["value"] for r in json.loads(text)["rates"] if r["name"] == "chi1_leading")
    assert chi(pos) == pytest.approx(-chi(neg))


@pytest.mark.parametrize(
    "argv",
    [
        ["point", "--tm", "1e-3", "--dark", "50e-6"],
        ["point", "--config", "/nonexistent/params.cfg"],
        ["sweep", "--parameter", "T1", "--from", "2", "--to", "1", "--steps", "3"],
    ],
)
def test_usage_errors_exit_1(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 1 and "error" in err


@pytest.mark.parametrize("argv", [["warp"], ["point", "--tm", "soon"], ["point", "--format", "xml"]])
def test_argument_errors_exit_1(capsys, argv):
    with pytest.raises(SystemExit) as info:
        cli.main(argv)
    assert info.value.code == 1


def test_overdamped_transfer_exits_2(capsys, tmp_path):
    cfg = tmp_path / "wide.cfg"
    cfg.write_text("kappa = 80e3\n")
    code, _, err = run(capsys, "point", "--config", str(cfg))
    assert code == 2 and "physics error" in err


def test_sweep_rows(capsys):
    code, out, _ = run(capsys, "sweep", "--parameter", "T2_minus_T_ratio", "--from", "0.5", "--to", "1.5",
                       "--steps", "3", "--policy", "fig3")
    rows = csv_rows(out)
    assert code == 0
    assert [float(r["value"]) for r in rows] == [0.5, 1.0, 1.5]
    assert all(r["status"] == "ok" for r in rows)


def test_sweep_with_failed_rows_exits_2(capsys):
    code, out, _ = run(capsys, "sweep", "--parameter", "kappa", "--from", "6.4e3", "--to", "80e3", "--steps", "2",
                       "--format", "json")
    rows = json.loads(out)["rows"]
    assert code == 2
    assert rows[0]["status"] == "ok" and rows[1]["status"].startswith("failed")
    assert rows[1]["E_N"] is None


def test_figure_csv_is_reproducible(capsys, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(capsys, "figure", "3", "--out", str(a))[0] == 0
    assert run(capsys, "figure", "3", "--out", str(b), "--workers", "2")[0] == 0
    names = sorted(p.name for p in a.iterdir())
    assert "fig3_summary.json" in names and "fig3_kappa_800Hz_noiseless.csv" in names
    assert len(names) == 6
    for name in names:
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_figure_to_stdout_json(capsys):
    code, out, _ = run(capsys, "figure", "4", "--format", "json", "--no-reference")
    data = json.loads(out)
    assert code == 0
    assert len(data["curves"]) == 4
    assert all(entry["first_zero"] > 5e-3 for entry in data["summary"])


def test_oracle_passes(capsys):
    code, out, _ = run(capsys, "oracle", "--format", "json", "--ratio", "0.6")
    data = json.loads(out)
    assert code == 0 and data["passed"] and data["max_rel_err"] < 1e-6


def test_oracle_deviation_exits_3(capsys, monkeypatch):
    def flip(stage, drift, gain):
        return (-drift, gain) if stage is Stage.PULSE1 else (drift, gain)

    monkeypatch.setattr(cli, "ORACLE_GENERATOR_HOOK", flip)
    code, _, err = run(capsys, "oracle")
    assert code == 3 and "DEVIATION" in err


@pytest.mark.parametrize("value, text", [(1.0, "1"), (0.1 + 0j, "0.1"), (1 - 2j, "1-2j"), (float("nan"), "nan"),
                                         (True, "true"), (np.int64(3), "3"), (1 / 3, "0.333333333333")])
def test_cell_format(value, text):
    assert cli.fmt(value) == text
