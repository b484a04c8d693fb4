"""Map the intracavity correlation matrix onto the detected output modes.

Each output mode is the cavity output integrated over a flat window of
length ``Tm`` starting at the end of its pulse. It equals
``alpha a(T_j)`` plus vacuum input noise, so

    Vout = alpha^2 V + (1 - alpha^2) / 2 * I + Vmix

where ``Vmix`` comes from input noise of the first window that is still in
the cavity when the second pulse starts.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from .model import DerivedRates, PulseSchedule
from .propagators import Stage, g_kernel, stage_coefficients


class WindowOverlapError(ValueError):
    pass


@lru_cache(maxsize=1)
def optimal_window_constant() -> float:
    """Root ``x*`` of ``2 x exp(-x) = 1 - exp(-x)``, the maximizer of ``(1 - e^-x)^2 / x``."""
    return brentq(lambda x: 2 * x * math.exp(-x) + math.expm1(-x), 0.5, 3.0, xtol=1e-15)


def alpha_factor(Tm: float, rates: DerivedRates) -> float:
    """Weight of the intracavity field in the integrated output mode."""
    if Tm <= 0:
        raise ValueError("measurement window must be positive")
    gam = rates.cavity_decay
    return math.sqrt(2 * rates.kappa / Tm) * -math.expm1(-gam * Tm) / gam


def optimal_Tm(rates: DerivedRates) -> float:
    return optimal_window_constant() / rates.cavity_decay


def v_in_matrix(alpha: float) -> np.ndarray:
    if not 0 <= alpha <= 1:
        raise ValueError("alpha must lie in [0, 1]")
    return 0.5 * (1 - alpha**2) * np.eye(4)


def v_mix_scalar(schedule: PulseSchedule, rates: DerivedRates, Tm: float) -> float:
    gam = rates.cavity_decay
    gm2 = g_kernel(schedule.transfer, -1, stage_coefficients(rates, Stage.PULSE2))
    alpha = alpha_factor(Tm, rates)
    return (alpha * math.sqrt(rates.kappa / (2 * Tm)) * math.exp(-gam * schedule.dark)
            * gm2 * math.expm1(-gam * Tm) / gam)


def v_mix_matrix(value: float) -> np.ndarray:
    M = np.zeros((4, 4))
    M[0, 2] = M[2, 0] = M[1, 3] = M[3, 1] = value
    return M


@dataclass(frozen=True)
class OutputWindow:
    Tm: float
    alpha: float
    Tm_optimal: float
    clamped: bool = False


def choose_window(rates: DerivedRates, schedule: PulseSchedule, Tm: float | None = None) -> OutputWindow:
    """Resolve the measurement window; ``None`` selects the optimum.

    The automatic window is shortened to ``T - T1`` (with a warning) when the
    optimum would make the two output modes overlap. An explicit window that
    overlaps raises :class:`WindowOverlapError`.
    """
    best = optimal_Tm(rates)
    clamped = False
    if Tm is None:
        Tm = best
        if Tm > schedule.dark:
            warnings.warn(f"optimal window {Tm:.3g} s exceeds the dark interval; clamped to {schedule.dark:.3g} s",
                          stacklevel=2)
            Tm, clamped = schedule.dark, True
    elif Tm > schedule.dark:
        raise WindowOverlapError(f"output modes overlap: Tm = {Tm:.3g} s > T - T1 = {schedule.dark:.3g} s")
    if Tm <= 0:
        raise WindowOverlapError("output modes overlap: zero dark interval leaves no measurement window")
    return OutputWindow(Tm, alpha_factor(Tm, rates), best, clamped)


def output_cov(V: np.ndarray, schedule: PulseSchedule, rates: DerivedRates, Tm: float) -> np.ndarray:
    if Tm > schedule.dark:
        raise WindowOverlapError(f"output modes overlap: Tm = {Tm:.3g} s > T - T1 = {schedule.dark:.3g} s")
    alpha = alpha_factor(Tm, rates)
    out = alpha**2 * np.asarray(V) + v_in_matrix(alpha) + v_mix_matrix(v_mix_scalar(schedule, rates, Tm))
    return 0.5 * (out + out.T)
