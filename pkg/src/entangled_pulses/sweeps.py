"""Parameter sweeps and reference-curve regeneration.

A sweep varies one quantity on a linear grid and evaluates the full
pipeline at every point. The schedule at each point follows a policy:

``fig3``
    ``T1`` fixed, ``T - T1 = 2 / (kappa + kappa_L)``, swept ``(T2 - T) / dT2opt``.
``fig4``
    ``T1`` fixed, ``T2 - T = dT2opt``, swept ``T - T1``.
``fig5``
    ``T - T1 = 2 / (kappa + kappa_L)``, ``T2 - T = dT2opt``, swept ``T1``.
``custom``
    ``T1``, ``T - T1`` and the transfer ratio taken from the sweep spec; a ``None``
    dark time means two cavity lifetimes.

Rows are evaluated independently (optionally in worker processes) and always
returned in grid order. A point that raises is kept as a failed row with NaN
values and the sweep continues.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from enum import Enum

import numpy as np

from .model import REFERENCE_KAPPAS_HZ, TWO_PI, ChiLevel, PhysicalParams, derive_rates, reference_params
from .protocol import figure_schedule, run_point

#: first-pulse duration of the fixed-``T1`` reference curves (s)
REFERENCE_T1 = 40e-6
#: end of the ``T - T1`` axis of the decay curves (s)
FIG4_DARK_MAX = 12e-3
FIG4_STEPS = 200
FIG3_RATIO_RANGE = (0.2, 2.0)
FIG3_STEPS = 101
FIG5_T1_RANGE = (2e-6, 80e-6)
FIG5_STEPS = 79

ROW_FIELDS = ("value", "E_N", "eta_minus", "xi_EPR", "nbar1", "nbar2", "alpha", "dT2opt", "warnings", "status")


class SweepParameter(str, Enum):
    T1 = "T1"
    T_MINUS_T1 = "T_minus_T1"
    T2_MINUS_T_RATIO = "T2_minus_T_ratio"
    KAPPA = "kappa"
    KAPPA_H = "kappa_h"
    OMEGA1 = "Omega1"
    ETA = "eta"


class SchedulePolicy(str, Enum):
    FIG3 = "fig3"
    FIG4 = "fig4"
    FIG5 = "fig5"
    CUSTOM = "custom"


# the schedule quantity each policy sweeps
_POLICY_AXIS = {
    SchedulePolicy.FIG3: SweepParameter.T2_MINUS_T_RATIO,
    SchedulePolicy.FIG4: SweepParameter.T_MINUS_T1,
    SchedulePolicy.FIG5: SweepParameter.T1,
}
_SCHEDULE_PARAMETERS = tuple(_POLICY_AXIS.values())
# swept physical parameters given in Hz (converted to rad/s)
_FREQUENCY_PARAMETERS = {SweepParameter.KAPPA: "kappa", SweepParameter.KAPPA_H: "kappa_h",
                         SweepParameter.OMEGA1: "omega1"}


@dataclass(frozen=True)
class SweepSpec:
    """A linear grid over one quantity.

    Times are in seconds and frequencies (``kappa``, ``kappa_h``, ``Omega1``)
    in Hz. ``T1``, ``dark`` and ``transfer_ratio`` fix the schedule
    quantities that the policy does not sweep.
    """

    parameter: SweepParameter
    start: float
    stop: float
    steps: int
    schedule_policy: SchedulePolicy = SchedulePolicy.CUSTOM
    T1: float = REFERENCE_T1
    dark: float | None = None
    transfer_ratio: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "parameter", SweepParameter(self.parameter))
        object.__setattr__(self, "schedule_policy", SchedulePolicy(self.schedule_policy))
        if not self.start < self.stop:
            raise ValueError(f"sweep needs start < stop, got {self.start} and {self.stop}")
        if self.steps < 2:
            raise ValueError("sweep needs at least two steps")
        axis = _POLICY_AXIS.get(self.schedule_policy)
        if axis is not None and self.parameter in _SCHEDULE_PARAMETERS and self.parameter is not axis:
            raise ValueError(f"policy {self.schedule_policy.value} sweeps {axis.value}, not {self.parameter.value}")

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.steps)


@dataclass(frozen=True)
class SweepRow:
    value: float
    E_N: float
    eta_minus: float
    xi_EPR: float
    nbar1: float
    nbar2: float
    alpha: float
    dT2opt: float
    warnings: int
    status: str = "ok"

    @property
    def failed(self) -> bool:
        return self.status != "ok"

    def as_dict(self) -> dict:
        return asdict(self)


def _schedule_inputs(spec: SweepSpec, value: float) -> tuple[float, float | None, float]:
    T1, dark, ratio = spec.T1, spec.dark, spec.transfer_ratio
    if spec.schedule_policy in (SchedulePolicy.FIG3, SchedulePolicy.FIG5):
        dark = None
    if spec.schedule_policy in (SchedulePolicy.FIG4, SchedulePolicy.FIG5):
        ratio = 1.0
    if spec.parameter is SweepParameter.T1:
        T1 = value
    elif spec.parameter is SweepParameter.T_MINUS_T1:
        dark = value
    elif spec.parameter is SweepParameter.T2_MINUS_T_RATIO:
        ratio = value
    return T1, dark, ratio


def _point_params(params: PhysicalParams, spec: SweepSpec, value: float) -> PhysicalParams:
    if spec.parameter in _FREQUENCY_PARAMETERS:
        name = _FREQUENCY_PARAMETERS[spec.parameter]
        changes = {name: TWO_PI * value}
        if name == "kappa_h":
            # keep the bath occupation fixed when the heating rate changes
            changes["kappa_b"] = params.kappa_b * value * TWO_PI / params.kappa_h if params.kappa_h else None
        return params.with_(**changes)
    if spec.parameter is SweepParameter.ETA:
        return params.with_(eta=value)
    return params


def _failed_row(value: float, message: str, n_warnings: int = 0) -> SweepRow:
    nan = math.nan
    return SweepRow(value, nan, nan, nan, nan, nan, nan, nan, n_warnings, f"failed: {message}")


def evaluate_row(params: PhysicalParams, spec: SweepSpec, value: float, chi_level: ChiLevel | str = ChiLevel.LEADING,
                 noiseless: bool = False, Tm: float | None = None) -> SweepRow:
    """One grid point of a sweep; errors become a failed row."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        try:
            p = _point_params(params, spec, value)
            rates = derive_rates(p, chi_level=chi_level, noiseless=noiseless)
            T1, dark, ratio = _schedule_inputs(spec, value)
            schedule = figure_schedule(rates, T1, dark=dark, transfer_ratio=ratio)
            res = run_point(p, schedule, Tm=Tm, rates=rates)
        except (ValueError, ArithmeticError) as exc:
            return _failed_row(value, str(exc))
    rep = res.report
    return SweepRow(float(value), rep.E_N, rep.eta_minus, rep.xi_EPR, rep.nbar_pulse1, rep.nbar_pulse2,
                    res.window.alpha, res.transfer_optimum, len(res.warnings))


def _evaluate_star(job):
    return evaluate_row(*job)


def run_sweep(params: PhysicalParams, spec: SweepSpec, chi_level: ChiLevel | str = ChiLevel.LEADING,
              noiseless: bool = False, Tm: float | None = None, workers: int = 1) -> list[SweepRow]:
    """Evaluate every grid point; rows come back in grid order."""
    jobs = [(params, spec, float(v), chi_level, noiseless, Tm) for v in spec.grid]
    if workers <= 1:
        return [_evaluate_star(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_evaluate_star, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


@dataclass(frozen=True)
class Curve:
    """One curve of a reference figure."""

    label: str
    kappa_hz: float
    noiseless: bool
    spec: SweepSpec
    rows: list[SweepRow]

    @property
    def values(self) -> np.ndarray:
        return np.array([r.value for r in self.rows])

    @property
    def E_N(self) -> np.ndarray:
        return np.array([r.E_N for r in self.rows])

    @property
    def eta_minus(self) -> np.ndarray:
        return np.array([r.eta_minus for r in self.rows])


def figure_spec(which: int, params: PhysicalParams, chi_level: ChiLevel | str = ChiLevel.LEADING,
                noiseless: bool = False) -> SweepSpec:
    """Grid and policy of reference figure 3, 4 or 5 for one parameter set."""
    if which == 3:
        return SweepSpec(SweepParameter.T2_MINUS_T_RATIO, *FIG3_RATIO_RANGE, FIG3_STEPS, SchedulePolicy.FIG3)
    if which == 4:
        rates = derive_rates(params, chi_level=chi_level, noiseless=noiseless)
        start = 2.0 / rates.cavity_decay
        return SweepSpec(SweepParameter.T_MINUS_T1, start, FIG4_DARK_MAX, FIG4_STEPS, SchedulePolicy.FIG4)
    if which == 5:
        return SweepSpec(SweepParameter.T1, *FIG5_T1_RANGE, FIG5_STEPS, SchedulePolicy.FIG5)
    raise ValueError(f"no reference figure {which}; choose 3, 4 or 5")


def reproduce_figure(which: int, base: PhysicalParams | None = None, kappas_hz=REFERENCE_KAPPAS_HZ,
                     chi_level: ChiLevel | str = ChiLevel.LEADING, include_noiseless: bool = True,
                     workers: int = 1) -> list[Curve]:
    """Curves of reference figure ``which`` for every cavity decay rate.

    The noiseless comparison curve uses the smallest ``kappa`` with every
    other loss channel switched off and is appended last.
    """
    base = base if base is not None else reference_params()
    variants = [(k, False) for k in kappas_hz]
    if include_noiseless:
        variants.append((min(kappas_hz), True))
    curves = []
    for kappa_hz, noiseless in variants:
        params = base.with_(kappa=TWO_PI * kappa_hz)
        spec = figure_spec(which, params, chi_level, noiseless)
        rows = run_sweep(params, spec, chi_level=chi_level, noiseless=noiseless, workers=workers)
        label = f"kappa_{kappa_hz:g}Hz" + ("_noiseless" if noiseless else "")
        curves.append(Curve(label, kappa_hz, noiseless, spec, rows))
    return curves


def figure_summary(which: int, curves: list[Curve]) -> list[dict]:
    """Headline numbers per curve: peak position, zero crossing or plateau."""
    out = []
    for c in curves:
        e = c.E_N
        entry = {"label": c.label, "kappa_hz": c.kappa_hz, "noiseless": c.noiseless,
                 "failed_rows": sum(r.failed for r in c.rows)}
        finite = np.isfinite(e)
        if finite.any():
            i = int(np.nanargmax(np.where(finite, e, -np.inf)))
            entry.update(argmax=float(c.values[i]), max_E_N=float(e[i]), last_E_N=float(e[finite][-1]))
        if which == 4:
            zero = np.flatnonzero(finite & (e <= 0))
            entry["first_zero"] = float(c.values[zero[0]]) if zero.size else math.nan
        out.append(entry)
    return out

