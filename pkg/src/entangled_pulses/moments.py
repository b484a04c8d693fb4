"""Second moments of the cavity field and the motion through the protocol.

The state starts in the vacuum, every stage is linear and all inputs have
zero mean, so second moments describe it completely. Notation:

``n_a = <a^dag a>``, ``n_b = <b^dag b>``, ``c_ab = <a b>``, ``c_ba = <b a>``
and ``aadag = <a a^dag>``.

The recoil noise enters both mode equations, so the effective equations only
conserve the commutators approximately. ``c_ab`` and ``c_ba`` (and ``n_a``
and ``aadag``) are therefore kept separately; the size of ``<[a, b]>`` is
reported as :attr:`MomentSet.commutator_drift` and serves as a validity flag.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import DerivedRates, PulseSchedule
from .propagators import (
    KernelIntegrals,
    Stage,
    StageCoefficients,
    dark_decay_factors,
    f_kernel,
    g_kernel,
    kernel_integrals,
    phi_decay,
    stage_coefficients,
)

#: relative size of ``[a, b]`` beyond which the expansion is reported as unreliable
COMMUTATOR_TOLERANCE = 0.1


@dataclass(frozen=True)
class MomentSet:
    """Equal-time moments at ``stage_time``; ``aa = <a a>`` vanishes here."""

    n_a: float
    n_b: float
    c_ab: complex
    c_ba: complex
    aadag: float
    stage_time: float
    aa: complex = 0j

    @property
    def commutator_drift(self) -> float:
        """``|<[a, b]>|`` relative to ``max(1, |<ab>|)``."""
        return abs(self.c_ab - self.c_ba) / max(1.0, abs(self.c_ab))

    @property
    def perturbative(self) -> bool:
        return self.commutator_drift <= COMMUTATOR_TOLERANCE


VACUUM = MomentSet(0.0, 0.0, 0j, 0j, 1.0, 0.0)


@dataclass(frozen=True)
class TwoTimeSet:
    """Correlators linking the cavity field at the ends of the two pulses.

    ``a1a2 = <a(T1) a(T2)>``, ``a1a2dag = <a(T1) a^dag(T2)>``,
    ``a1dag_a2 = <a^dag(T1) a(T2)>`` and ``a2a2dagdag = <a^dag(T2)^2>``.
    The remaining correlators are complex conjugates of these.
    """

    n_a_T1: float
    n_a_T2: float
    a1a2: complex
    a1a2dag: complex
    a1dag_a2: complex
    a2a2dagdag: complex


def noise_integrals_pulse1(coeffs: StageCoefficients, T1: float) -> KernelIntegrals:
    if coeffs.stage is not Stage.PULSE1:
        raise ValueError("expected pulse-1 coefficients")
    return kernel_integrals(coeffs, T1)


def moments_after_pulse1(rates: DerivedRates, T1: float) -> MomentSet:
    """Moments at the end of the entangling pulse, starting from vacuum.

    The bath correlators are ``<b_in b_in^dag> = kappa_h + 2 kappa_b`` and
    ``<b_in^dag b_in> = kappa_h``. The recoil noise ``a_-`` drives both the
    cavity (through ``kbar_L``) and the motion (through ``kbar_b_m1``), which
    gives the cross terms in ``n_b`` and ``c_ab``.
    """
    if T1 < 0:
        raise ValueError("T1 must be non-negative")
    co = stage_coefficients(rates, Stage.PULSE1)
    chi = rates.chi1
    chi_sq = abs(chi) ** 2
    f1 = f_kernel(T1, co)
    gp1, gm1 = g_kernel(T1, 1, co), g_kernel(T1, -1, co)
    I = kernel_integrals(co, T1)
    kh, kb, kappa = rates.kappa_h, rates.kappa_b, rates.kappa
    kL, kbL = rates.kappa_L, rates.kbar_L
    kp, km, kbm = rates.kappa_b_p1, rates.kappa_b_m1, rates.kbar_b_m1

    n_a = chi_sq * (f1**2 + (kh + 2 * kb + 2 * kp) * I.ff)
    cross = (kbm * np.conj(chi * kbL)).real
    n_b = (chi_sq * f1**2 + kh * I.gg + 2 * kappa * chi_sq * I.ff
           + 2 * (km * I.gg + chi_sq * kL * I.ff - 2 * cross * I.fg))
    c_ab = (gm1 * chi * f1
            + (kh + 2 * km) * chi * I.fg
            + 2 * (kappa + kL) * chi * I.gf
            - 2 * np.conj(kbm) * kbL * chi**2 * I.ff
            - 2 * np.conj(kbL) * kbm * I.gmgp)
    c_ba = chi * (gp1 * f1 + (kh + 2 * kb + 2 * kp) * I.fg)
    aadag = (gm1**2 + 2 * (kappa + kL) * I.gmgm + chi_sq * (kh + 2 * km) * I.ff
             - 4 * (np.conj(kbL) * kbm * np.conj(chi)).real * I.gf)
    return MomentSet(float(n_a), float(n_b), complex(c_ab), complex(c_ba), float(aadag), T1)


def propagate_dark(m: MomentSet, dt: float, rates: DerivedRates) -> MomentSet:
    """Free decay of the cavity and heating of the motion with the lasers off."""
    co = stage_coefficients(rates, Stage.DARK)
    e_a, e_b = dark_decay_factors(dt, co)
    kb = rates.kappa_b
    n_a = m.n_a * e_a**2
    aadag = m.aadag * e_a**2 - math.expm1(-2 * co.cavity_decay * dt)
    n_b = m.n_b * math.exp(-2 * kb * dt) + rates.kappa_h * dt * phi_decay(2 * kb * dt)
    return MomentSet(n_a, n_b, m.c_ab * e_a * e_b, m.c_ba * e_a * e_b, aadag, m.stage_time + dt)


def correlators_after_pulse2(
    m_T: MomentSet,
    m_T1: MomentSet,
    rates: DerivedRates,
    schedule: PulseSchedule,
) -> TwoTimeSet:
    """Two-time correlators between the cavity field at ``T1`` and at ``T2``.

    ``m_T`` holds the moments at the start of the second pulse. Noise entering
    after ``T1`` is uncorrelated with ``a(T1)``, so the two-time terms only
    carry the deterministic propagators of the dark stage and of pulse 2.
    """
    co2 = stage_coefficients(rates, Stage.PULSE2)
    e_a, e_b = dark_decay_factors(schedule.dark, stage_coefficients(rates, Stage.DARK))
    d2 = schedule.transfer
    f2 = f_kernel(d2, co2)
    gm2 = g_kernel(d2, -1, co2)
    chi2 = rates.chi2
    ff2 = kernel_integrals(co2, d2).ff

    n_a_T2 = (gm2**2 * m_T.n_a + abs(chi2) ** 2 * f2**2 * m_T.n_b
              + abs(chi2) ** 2 * (rates.kappa_h + 2 * rates.kappa_b_m2) * ff2)
    a1a2 = chi2 * f2 * e_b * m_T1.c_ab
    a1a2dag = gm2 * e_a * m_T1.aadag
    a1dag_a2 = gm2 * e_a * m_T1.n_a
    a2a2dagdag = np.conj(chi2) * f2 * gm2 * np.conj(m_T.c_ab + m_T.c_ba)
    return TwoTimeSet(m_T1.n_a, float(n_a_T2), complex(a1a2), complex(a1a2dag),
                      complex(a1dag_a2), complex(a2a2dagdag))


# rows map (a, a^dag) of one mode onto (X, P)
_QUAD = np.array([[1.0, 1.0], [-1j, 1j]]) / math.sqrt(2.0)
QUADRATURE_MAP = np.kron(np.eye(2), _QUAD)


def symmetric_moments(t: TwoTimeSet) -> np.ndarray:
    """Matrix of ``<z_k z_l>`` for ``z = (a1, a1^dag, a2, a2^dag)``.

    Diagonal blocks are symmetrized equal-time moments. The ``a1 a2`` entries
    keep the time order, the mixed ones are symmetrized.
    """
    S = np.zeros((4, 4), dtype=complex)
    S[0, 1] = S[1, 0] = t.n_a_T1 + 0.5
    S[2, 3] = S[3, 2] = t.n_a_T2 + 0.5
    S[2, 2] = np.conj(t.a2a2dagdag)
    S[3, 3] = t.a2a2dagdag
    S[0, 2] = S[2, 0] = t.a1a2
    S[1, 3] = S[3, 1] = np.conj(t.a1a2)
    S[0, 3] = S[3, 0] = 0.5 * (t.a1a2dag + np.conj(t.a1dag_a2))
    S[1, 2] = S[2, 1] = 0.5 * (t.a1dag_a2 + np.conj(t.a1a2dag))
    return S


def quadrature_cov(S: np.ndarray) -> np.ndarray:
    """Real quadrature covariance ``(X1, P1, X2, P2)`` from ladder moments."""
    V = (QUADRATURE_MAP @ S @ QUADRATURE_MAP.T).real
    return 0.5 * (V + V.T)


def intracavity_cov(two_time: TwoTimeSet) -> np.ndarray:
    return quadrature_cov(symmetric_moments(two_time))


@dataclass(frozen=True)
class IntracavityResult:
    after_pulse1: MomentSet
    before_pulse2: MomentSet
    two_time: TwoTimeSet
    V: np.ndarray


def run_intracavity(rates: DerivedRates, schedule: PulseSchedule) -> IntracavityResult:
    m1 = moments_after_pulse1(rates, schedule.T1)
    mT = propagate_dark(m1, schedule.dark, rates)
    tt = correlators_after_pulse2(mT, m1, rates, schedule)
    return IntracavityResult(m1, mT, tt, intracavity_cov(tt))
