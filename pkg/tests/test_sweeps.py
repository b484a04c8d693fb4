import math

import numpy as np
import pytest

from entangled_pulses.model import derive_rates, reference_params
from entangled_pulses.sweeps import (
    Curve,
    SchedulePolicy,
    SweepParameter,
    SweepRow,
    SweepSpec,
    evaluate_row,
    figure_spec,
    figure_summary,
    reproduce_figure,
    run_sweep,
)

BASE = reference_params(6400.0)


def test_two_step_sweep_hits_both_ends():
    spec = SweepSpec("T2_minus_T_ratio", 0.5, 1.5, 2, "fig3")
    rows = run_sweep(BASE, spec)
    assert [r.value for r in rows] == [0.5, 1.5]
    assert not any(r.failed for r in rows)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(parameter="T1", start=2.0, stop=1.0, steps=5),
        dict(parameter="T1", start=1.0, stop=2.0, steps=1),
        dict(parameter="T1", start=1.0, stop=2.0, steps=3, schedule_policy="fig3"),
        dict(parameter="nope", start=1.0, stop=2.0, steps=3),
    ],
)
def test_invalid_specs(kwargs):
    with pytest.raises(ValueError):
        SweepSpec(**kwargs)


def test_physical_parameter_allowed_under_any_policy():
    spec = SweepSpec("eta", 0.05, 0.1, 3, "fig4", dark=1e-3)
    assert spec.parameter is SweepParameter.ETA and spec.schedule_policy is SchedulePolicy.FIG4


def test_rows_deterministic_and_independent_of_workers():
    spec = SweepSpec("T1", 5e-6, 60e-6, 6, "fig5")
    serial = run_sweep(BASE, spec)
    assert serial == run_sweep(BASE, spec)
    assert run_sweep(BASE, spec, workers=2) == serial


def test_rows_consistent_with_eta_minus():
    rows = run_sweep(BASE, SweepSpec("T2_minus_T_ratio", 0.2, 2.0, 7, "fig3"))
    for r in rows:
        assert r.E_N == pytest.approx(max(0.0, -math.log(2 * r.eta_minus)), abs=1e-12)


def test_failed_point_is_kept_and_marked():
    # 80 kHz makes the transfer overdamped so no optimum exists
    spec = SweepSpec("kappa", 6.4e3, 80e3, 2)
    rows = run_sweep(BASE, spec)
    assert not rows[0].failed
    assert rows[1].failed and rows[1].status.startswith("failed:")
    assert math.isnan(rows[1].E_N)


def test_no_drive_gives_no_entanglement():
    row = evaluate_row(BASE, SweepSpec("Omega1", 0.0, 1e6, 2), 0.0)
    assert row.E_N == pytest.approx(0.0, abs=1e-12) and row.nbar1 == pytest.approx(0.0, abs=1e-12)


def test_kappa_axis_in_hz():
    row = evaluate_row(BASE, SweepSpec("kappa", 800.0, 16e3, 2), 800.0)
    ref = evaluate_row(reference_params(800.0), SweepSpec("T1", 1e-6, 40e-6, 2), 40e-6)
    assert row.E_N == pytest.approx(ref.E_N, rel=1e-12)


def test_heating_sweep_scales_with_rate():
    spec = SweepSpec("kappa_h", 10.0, 400.0, 2, "fig4", dark=3e-3)
    low, high = run_sweep(BASE, spec)
    assert high.E_N < low.E_N


def test_long_dark_time_destroys_entanglement():
    rates = derive_rates(BASE)
    spec = SweepSpec("T_minus_T1", 2 / rates.cavity_decay, 25e-3, 2, "fig4")
    rows = run_sweep(BASE, spec)
    assert rows[0].E_N > 0.3
    assert rows[1].E_N == 0.0


def test_figure_specs():
    assert figure_spec(3, BASE).steps == 101
    f4 = figure_spec(4, BASE)
    assert f4.start == pytest.approx(2 / derive_rates(BASE).cavity_decay)
    assert figure_spec(5, BASE).parameter is SweepParameter.T1
    with pytest.raises(ValueError):
        figure_spec(6, BASE)


def test_summary_finds_peak_and_zero():
    spec = SweepSpec("T_minus_T1", 1.0, 3.0, 3, "fig4")
    rows = [SweepRow(v, e, 0.5, 1.0, 0, 0, 0, 0, 0) for v, e in zip((1.0, 2.0, 3.0), (0.3, 0.0, 0.0))]
    (entry,) = figure_summary(4, [Curve("c", 6400.0, False, spec, rows)])
    assert entry["argmax"] == 1.0 and entry["first_zero"] == 2.0 and entry["failed_rows"] == 0


def test_fig5_curves_ordered_by_cavity_decay():
    curves = reproduce_figure(5, kappas_hz=(16e3, 0.8e3), include_noiseless=False)
    assert np.all(curves[1].E_N > curves[0].E_N)


def test_noiseless_curve_dominates_same_cavity():
    (noisy,) = reproduce_figure(3, kappas_hz=(800.0,), include_noiseless=False)
    clean = run_sweep(reference_params(800.0), noisy.spec, noiseless=True)
    assert all(c.E_N >= n.E_N for c, n in zip(clean, noisy.rows))
