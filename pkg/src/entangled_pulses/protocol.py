"""End-to-end evaluation of one protocol run."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .entanglement import EntanglementReport, entanglement_report, is_physical
from .model import (
    ChiLevel,
    DerivedRates,
    Diagnostic,
    PhysicalParams,
    PulseSchedule,
    Status,
    derive_rates,
    validate_regime,
)
from .moments import IntracavityResult, run_intracavity
from .output import OutputWindow, choose_window, output_cov
from .propagators import Stage, optimal_transfer_time, stage_coefficients


@dataclass(frozen=True)
class PointResult:
    params: PhysicalParams
    rates: DerivedRates
    schedule: PulseSchedule
    window: OutputWindow
    intracavity: IntracavityResult
    V_out: np.ndarray
    report: EntanglementReport
    diagnostics: list[Diagnostic]
    warnings: list[str] = field(default_factory=list)

    @property
    def transfer_optimum(self) -> float:
        return transfer_optimum(self.rates)

    @property
    def physical(self) -> bool:
        return is_physical(self.V_out)

    @property
    def failed_checks(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.status is Status.FAIL]


def transfer_optimum(rates: DerivedRates) -> float:
    return optimal_transfer_time(stage_coefficients(rates, Stage.PULSE2))


def run_point(
    params: PhysicalParams,
    schedule: PulseSchedule,
    Tm: float | None = None,
    chi_level: ChiLevel | str = ChiLevel.LEADING,
    noiseless: bool = False,
    rates: DerivedRates | None = None,
) -> PointResult:
    """Evaluate the detected two-pulse state for one schedule.

    ``Tm=None`` uses the optimal measurement window (shortened to the dark
    interval if needed). Warnings raised along the way are collected in
    :attr:`PointResult.warnings` as well as re-emitted.
    """
    if rates is None:
        rates = derive_rates(params, chi_level=chi_level, noiseless=noiseless)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        window = choose_window(rates, schedule, Tm)
        ic = run_intracavity(rates, schedule)
        V_out = output_cov(ic.V, schedule, rates, window.Tm)
        report = entanglement_report(V_out, nbar_pulse1=ic.after_pulse1.n_a, nbar_pulse2=ic.two_time.n_a_T2)
    messages = [str(w.message) for w in caught]
    if not ic.after_pulse1.perturbative:
        messages.append(f"perturbative validity exceeded: |<[a,b]>| drift {ic.after_pulse1.commutator_drift:.3g}")
    for label, cov in (("intracavity", ic.V), ("output", V_out)):
        if not is_physical(cov):
            messages.append(f"{label} covariance violates the uncertainty relation; "
                            "try chi_level='leading' or a shorter T1")
    for msg in messages:
        warnings.warn(msg, stacklevel=2)
    diagnostics = validate_regime(params, rates, photon_number=max(ic.after_pulse1.n_a, 1.0))
    return PointResult(params, rates, schedule, window, ic, V_out, report, diagnostics, messages)


def figure_schedule(rates: DerivedRates, T1: float, dark: float | None = None, transfer_ratio: float = 1.0) -> PulseSchedule:
    """Schedule used by the reference curves.

    ``dark=None`` uses two cavity lifetimes, ``2 / (kappa + kappa_L)``; the
    second pulse lasts ``transfer_ratio`` times the optimal transfer time.
    """
    if dark is None:
        dark = 2.0 / rates.cavity_decay
    return PulseSchedule.from_durations(T1, dark, transfer_ratio * transfer_optimum(rates))


def asymptotic_log_negativity(rates: DerivedRates) -> float:
    """Empirical saturation value ``ln(4 |chi_1| / kappa) / 4`` for long first pulses."""
    return math.log(4 * abs(rates.chi1) / rates.kappa) / 4
