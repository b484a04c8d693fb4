"""Closed-form time dependence of the three protocol stages.

Both laser pulses share one kernel. With ``kappa_S``, ``kappa_D`` and a
complex frequency ``w`` (``w = theta_1`` for the first pulse and
``w = i theta_2`` for the second),

    g_pm(t) = exp(-kappa_S t) [cosh(w t) +- kappa_D sinh(w t) / w]
    f(t)    = exp(-kappa_S t) sinh(w t) / w

so the second pulse gets its cos/sin form without a separate code path, and
an imaginary ``theta_2`` (overdamped transfer) continues analytically into
the hyperbolic form. The cavity field follows ``g_-`` and the motion ``g_+``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import gammainc

from .model import DerivedRates

SERIES_SWITCH = 1e-6
# below this |2 w T| the integral kernels switch to their power series in w
KERNEL_SERIES_SWITCH = 0.5
_KERNEL_TERMS = 14
# below this |a T| the moment integrals use their power series
MOMENT_SERIES_SWITCH = 0.5


class Stage(str, Enum):
    PULSE1 = "pulse1"
    DARK = "dark"
    PULSE2 = "pulse2"


@dataclass(frozen=True)
class StageCoefficients:
    """Rates that fix the propagator of one protocol stage (rad/s)."""

    stage: Stage
    kappa_S: float
    kappa_D: float
    theta: complex
    chi: complex
    cavity_decay: float
    motion_decay: float
    motion_phase: float

    def __post_init__(self):
        if self.stage is Stage.DARK and self.chi != 0:
            raise ValueError("the dark stage has no coupling")

    @property
    def omega(self) -> complex:
        """Complex frequency of the shared hyperbolic kernel."""
        if self.stage is Stage.PULSE2:
            return 1j * complex(self.theta)
        return complex(self.theta)


def stage_coefficients(rates: DerivedRates, stage: Stage | str) -> StageCoefficients:
    stage = Stage(stage)
    gamma_c = rates.cavity_decay
    if stage is Stage.PULSE1:
        return StageCoefficients(stage, rates.kappa_1S, rates.kappa_1D, complex(rates.theta_1), rates.chi1,
                                 gamma_c, rates.kappa_b + rates.kappa_b_p1 - rates.kappa_b_m1, 0.0)
    if stage is Stage.PULSE2:
        return StageCoefficients(stage, rates.kappa_2S, rates.kappa_2D, complex(rates.theta_2), rates.chi2,
                                 gamma_c, rates.kappa_b + rates.kappa_b_p2 - rates.kappa_b_m2, 0.0)
    return StageCoefficients(stage, 0.5 * (gamma_c + rates.kappa_b), 0.5 * (gamma_c - rates.kappa_b), 0j, 0j,
                             gamma_c, rates.kappa_b, rates.delta_1b)


def _cosh_sinhc(w: complex, t: float) -> tuple[complex, complex]:
    """Return ``cosh(w t)`` and ``sinh(w t) / w`` with a series near ``w t = 0``."""
    x = w * t
    if abs(x) < SERIES_SWITCH:
        x2 = x * x
        return 1 + x2 / 2 + x2 * x2 / 24, t * (1 + x2 / 6 + x2 * x2 / 120)
    return np.cosh(x), np.sinh(x) / w


def _check_time(t: float) -> None:
    if t < 0:
        raise ValueError(f"time must be non-negative, got {t}")


def g_kernel(t: float, sign: int, coeffs: StageCoefficients) -> float:
    _check_time(t)
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    c, s = _cosh_sinhc(coeffs.omega, t)
    return float((math.exp(-coeffs.kappa_S * t) * (c + sign * coeffs.kappa_D * s)).real)


def f_kernel(t: float, coeffs: StageCoefficients) -> float:
    _check_time(t)
    _, s = _cosh_sinhc(coeffs.omega, t)
    return float((math.exp(-coeffs.kappa_S * t) * s).real)


def _require(coeffs: StageCoefficients, stage: Stage) -> None:
    if coeffs.stage is not stage:
        raise ValueError(f"expected {stage.value} coefficients, got {coeffs.stage.value}")


def g_pulse1(t: float, sign: int, coeffs: StageCoefficients) -> float:
    _require(coeffs, Stage.PULSE1)
    return g_kernel(t, sign, coeffs)


def f_pulse1(t: float, coeffs: StageCoefficients) -> float:
    _require(coeffs, Stage.PULSE1)
    return f_kernel(t, coeffs)


def g_pulse2(t: float, sign: int, coeffs: StageCoefficients) -> float:
    _require(coeffs, Stage.PULSE2)
    return g_kernel(t, sign, coeffs)


def f_pulse2(t: float, coeffs: StageCoefficients) -> float:
    _require(coeffs, Stage.PULSE2)
    return f_kernel(t, coeffs)


class NoTransferOptimum(ValueError):
    pass


def optimal_transfer_time(coeffs: StageCoefficients) -> float:
    """First positive zero of the cavity amplitude ``g_-`` during the second pulse.

    ``g_-(t) = 0`` means ``tan(theta_2 t) = theta_2 / kappa_2D``; ``atan2``
    picks the smallest positive root for either sign of ``kappa_2D``.

    When the transfer is overdamped (imaginary ``theta_2``) this raises
    :class:`NoTransferOptimum`. For ``kappa_2D > 0`` the cavity amplitude
    still crosses zero once, at ``atanh(y / kappa_2D) / y`` with
    ``y = |theta_2|``, but the motion has decayed long before and no swap
    takes place there.
    """
    _require(coeffs, Stage.PULSE2)
    theta_sq = (complex(coeffs.theta) ** 2).real
    k_d = coeffs.kappa_D
    if theta_sq < 0:
        raise NoTransferOptimum("no transfer optimum; pulse-2 coupling below damping")
    theta = math.sqrt(theta_sq)
    if theta == 0:
        if k_d <= 0:
            raise NoTransferOptimum("no transfer optimum; pulse-2 coupling below damping")
        return 1.0 / k_d
    return math.atan2(theta, k_d) / theta


def dark_decay_factors(dt: float, coeffs: StageCoefficients) -> tuple[float, complex]:
    """Amplitude factors of the cavity field and the motion across a dark interval."""
    _require(coeffs, Stage.DARK)
    _check_time(dt)
    cavity = math.exp(-coeffs.cavity_decay * dt)
    motion = complex(np.exp((1j * coeffs.motion_phase - coeffs.motion_decay) * dt))
    return cavity, motion


# ---------------------------------------------------------------------------
# time integrals of products of kernel functions


def exp_integral(lam: complex, T: float) -> complex:
    """``int_0^T exp(lam s) ds`` without cancellation at small ``lam``."""
    x = lam * T
    if abs(x) < 1e-8:
        return T * (1 + x / 2 + x * x / 6)
    return np.expm1(x) / lam


def moment_integral(k: int, a: float, T: float) -> float:
    """``int_0^T s^k exp(a s) ds`` for real ``a <= 0``."""
    if a > 0:
        raise ValueError("moment_integral expects a non-positive exponent")
    x = -a * T
    if x < MOMENT_SERIES_SWITCH:
        # T^(k+1) sum_n (-x)^n / (n! (k + n + 1)), which avoids (-a)^(k+1) underflow
        total, term, n = 0.0, 1.0, 0
        while True:
            contrib = term / (k + n + 1)
            total += contrib
            if abs(contrib) <= 1e-17 * abs(total):
                break
            n += 1
            term *= -x / n
        return T ** (k + 1) * total
    return math.factorial(k) / (-a) ** (k + 1) * float(gammainc(k + 1, x))


@dataclass(frozen=True)
class KernelIntegrals:
    """Integrals over ``[0, T]`` of the stage kernel products.

    ``ff = int f^2``, ``gg = int g_+^2``, ``fg = int f g_+``,
    ``gf = int g_- f``, ``gmgp = int g_- g_+`` and ``gmgm = int g_-^2``.
    """

    ff: float
    gg: float
    fg: float
    gf: float
    gmgp: float
    gmgm: float


def kernel_integrals(coeffs: StageCoefficients, T: float) -> KernelIntegrals:
    """Closed-form integrals of the stage kernels over ``[0, T]``.

    Writing ``a = -2 kappa_S`` and ``h = 2 w`` every product reduces to
    ``E = int e^{as}``, ``P = int e^{as} sinh(hs) / h`` and
    ``Q = int e^{as} 2 (cosh(hs) - 1) / h^2``; ``P`` and ``Q`` use their power
    series in ``h`` when ``|h T|`` is small.
    """
    _check_time(T)
    if T == 0:
        return KernelIntegrals(0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    a = -2.0 * coeffs.kappa_S
    w = coeffs.omega
    h = 2.0 * w
    E = moment_integral(0, a, T)
    if abs(h * T) < KERNEL_SERIES_SWITCH:
        h2 = h * h
        P = Q = 0j
        hp = 1.0 + 0j
        for j in range(_KERNEL_TERMS):
            P += hp * moment_integral(2 * j + 1, a, T) / math.factorial(2 * j + 1)
            Q += 2 * hp * moment_integral(2 * j + 2, a, T) / math.factorial(2 * j + 2)
            hp *= h2
    else:
        Ep, Em, E0 = exp_integral(a + h, T), exp_integral(a - h, T), exp_integral(a, T)
        P = (Ep - Em) / (2 * h)
        Q = (Ep - 2 * E0 + Em) / (h * h)
    k_d = coeffs.kappa_D
    w2 = w * w
    ff = Q
    gg = E + w2 * Q + 2 * k_d * P + k_d * k_d * Q
    fg = P + k_d * Q
    gf = P - k_d * Q
    gmgp = E + w2 * Q - k_d * k_d * Q
    gmgm = E + w2 * Q - 2 * k_d * P + k_d * k_d * Q
    return KernelIntegrals(*(float(complex(v).real) for v in (ff, gg, fg, gf, gmgp, gmgm)))


def phi_decay(x: float) -> float:
    """``(1 - exp(-x)) / x`` with its limit 1 at ``x = 0``."""
    if abs(x) < 1e-6:
        return 1 - x / 2 + x * x / 6
    return -math.expm1(-x) / x
