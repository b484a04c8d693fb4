import math

import numpy as np
import pytest

from conftest import reference_rates
from entangled_pulses.entanglement import log_negativity, symplectic_eigenvalues
from entangled_pulses.model import REFERENCE_KAPPAS_HZ, TWO_PI, PulseSchedule, reference_params
from entangled_pulses.output import (
    WindowOverlapError,
    alpha_factor,
    choose_window,
    optimal_Tm,
    optimal_window_constant,
    output_cov,
    v_in_matrix,
    v_mix_matrix,
    v_mix_scalar,
)
from entangled_pulses.protocol import figure_schedule, run_point


def test_window_constant():
    x = optimal_window_constant()
    assert x == pytest.approx(1.25643, abs=1e-5)
    assert 2 * x * math.exp(-x) == pytest.approx(1 - math.exp(-x), abs=1e-15)


def test_alpha_vanishes_for_short_window():
    rates = reference_rates()
    for Tm in (1e-12, 1e-10):
        assert alpha_factor(Tm, rates) == pytest.approx(math.sqrt(2 * rates.kappa * Tm), rel=1e-3)
    with pytest.raises(ValueError):
        alpha_factor(0.0, rates)


@pytest.mark.parametrize("kappa_hz", REFERENCE_KAPPAS_HZ)
def test_alpha_maximum(kappa_hz):
    rates = reference_rates(kappa_hz)
    best = optimal_Tm(rates)
    a_best = alpha_factor(best, rates)
    assert a_best == pytest.approx(0.90 / math.sqrt(1 + rates.kappa_L / rates.kappa), rel=0.01)
    grid = np.geomspace(1e-3, 1e2, 2000) / rates.cavity_decay
    assert all(alpha_factor(t, rates) <= a_best for t in grid)
    h = 1e-4 * best
    slope = (alpha_factor(best + h, rates) - alpha_factor(best - h, rates)) / (2 * h)
    assert abs(slope * best / a_best) < 1e-6


def test_optimal_window_for_one_khz_decay():
    rates = reference_rates(1000.0, noiseless=True)
    assert rates.cavity_decay == pytest.approx(TWO_PI * 1e3)
    Tm = optimal_Tm(rates)
    assert Tm == pytest.approx(1.25643 / (TWO_PI * 1e3), rel=1e-5)
    assert Tm == pytest.approx(200e-6, rel=0.001)


@pytest.mark.parametrize("kappa_hz", REFERENCE_KAPPAS_HZ)
def test_optimal_window_close_to_rounded_rule(kappa_hz):
    rates = reference_rates(kappa_hz)
    assert optimal_Tm(rates) == pytest.approx(1.25 / rates.cavity_decay, rel=0.01)


@pytest.mark.parametrize("alpha, diag", [(1.0, 0.0), (0.0, 0.5), (0.9, 0.095)])
def test_input_noise_matrix(alpha, diag):
    assert v_in_matrix(alpha) == pytest.approx(diag * np.eye(4))


def test_input_noise_matrix_rejects_bad_alpha():
    with pytest.raises(ValueError):
        v_in_matrix(1.5)


@pytest.mark.parametrize("kappa_hz", REFERENCE_KAPPAS_HZ)
def test_mix_term_vanishes_at_optimal_transfer(kappa_hz):
    rates = reference_rates(kappa_hz)
    s = figure_schedule(rates, 40e-6)
    assert abs(v_mix_scalar(s, rates, optimal_Tm(rates))) < 1e-15


def test_mix_term_negligible_after_long_separation():
    rates = reference_rates(6400.0)
    s = figure_schedule(rates, 40e-6, dark=10 / rates.cavity_decay, transfer_ratio=0.5)
    Tm = optimal_Tm(rates)
    bound = alpha_factor(Tm, rates) * math.sqrt(rates.kappa / (2 * Tm)) / rates.cavity_decay
    assert 0 < abs(v_mix_scalar(s, rates, Tm)) < math.exp(-10) * bound


def test_mix_matrix_pattern():
    M = v_mix_matrix(0.3)
    assert M[0, 2] == M[2, 0] == M[1, 3] == M[3, 1] == 0.3
    assert np.count_nonzero(M) == 4


def test_vacuum_stays_vacuum_at_optimal_transfer():
    rates = reference_rates()
    s = figure_schedule(rates, 40e-6)
    out = output_cov(0.5 * np.eye(4), s, rates, optimal_Tm(rates))
    assert out == pytest.approx(0.5 * np.eye(4), abs=1e-15)


def test_perfect_collection_returns_intracavity_matrix():
    rates = reference_rates()
    s = figure_schedule(rates, 40e-6)
    V = np.diag([3.0, 3.0, 2.0, 2.0])
    alpha = alpha_factor(optimal_Tm(rates), rates)
    out = output_cov(V, s, rates, optimal_Tm(rates))
    assert out == pytest.approx(alpha**2 * V + 0.5 * (1 - alpha**2) * np.eye(4))


def test_window_clamped_with_warning():
    rates = reference_rates()
    s = figure_schedule(rates, 40e-6, dark=50e-6)
    with pytest.warns(UserWarning, match="clamped"):
        w = choose_window(rates, s)
    assert w.clamped and w.Tm == pytest.approx(s.dark)


def test_explicit_overlapping_window_rejected():
    rates = reference_rates()
    s = figure_schedule(rates, 40e-6, dark=50e-6)
    with pytest.raises(WindowOverlapError, match="overlap"):
        choose_window(rates, s, Tm=1e-3)
    with pytest.raises(WindowOverlapError):
        output_cov(np.eye(4), s, rates, 1e-3)


def test_zero_separation_has_no_window():
    rates = reference_rates()
    with pytest.raises(WindowOverlapError):
        choose_window(rates, PulseSchedule(40e-6, 40e-6, 70e-6))


@pytest.mark.parametrize("kappa_hz", REFERENCE_KAPPAS_HZ)
@pytest.mark.parametrize("ratio", [0.2, 0.6, 1.0, 1.4, 2.0])
@pytest.mark.parametrize("T1", [10e-6, 40e-6, 70e-6])
def test_output_physical_and_less_entangled(kappa_hz, ratio, T1):
    p = reference_params(kappa_hz)
    rates = reference_rates(kappa_hz)
    res = run_point(p, figure_schedule(rates, T1, transfer_ratio=ratio), rates=rates)
    assert symplectic_eigenvalues(res.V_out)[0] >= 0.5 - 1e-9
    assert res.report.E_N <= log_negativity(res.intracavity.V) + 1e-12
