"""Independent numerical reference built straight from the Langevin equations.

Every stage is a linear system ``dz = M z dt + K dzeta`` for the operator
vector ``z = (a, a^dag, b, b^dag)`` driven by the input noise vector

    zeta = (a_in, a_in^dag, a_-, a_-^dag, a_+, a_+^dag, b_th, b_th^dag)

with ``<dzeta_i dzeta_j> = N_ij dt``. Only the annihilation-operator rows
are written out; the creation-operator rows follow by conjugation. The
ordered moment matrix ``G = <z z^T>`` obeys ``dG/dt = M G + G M^T + K N K^T``
and two-time correlators ``R(t) = <z(T1) z(t)^T>`` obey ``dR/dt = R M^T``.

For the end-to-end check the vector is extended with the two integrated
output modes, ``dy_j = (sqrt(2 kappa) a dt - dA_in) / sqrt(Tm)`` during
window ``j``, so the detected covariance comes out without any of the
analytic reductions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp

from .model import DerivedRates, PulseSchedule
from .moments import MomentSet, TwoTimeSet, intracavity_cov, quadrature_cov
from .propagators import Stage

A, AD, B, BD = range(4)
NOISE = ("a_in", "a_in_dag", "a_m", "a_m_dag", "a_p", "a_p_dag", "b_th", "b_th_dag",
         "a_m2", "a_m2_dag")
IN, IND, AM, AMD, AP, APD, BT, BTD, AM2, AM2D = range(len(NOISE))

RTOL = 1e-10
ATOL = 1e-12
DEVIATION_LIMIT = 1e-4

GeneratorHook = Callable[[Stage, np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]


@dataclass(frozen=True)
class StageGenerator:
    stage: Stage
    drift: np.ndarray
    noise_gain: np.ndarray
    noise_corr: np.ndarray

    @property
    def diffusion(self) -> np.ndarray:
        K = self.noise_gain
        return K @ self.noise_corr @ K.T


def noise_correlations(rates: DerivedRates) -> np.ndarray:
    N = np.zeros((len(NOISE), len(NOISE)))
    for ann in (IN, AM, AP, AM2):
        N[ann, ann + 1] = 1.0
    N[BT, BTD] = rates.kappa_h + 2 * rates.kappa_b
    N[BTD, BT] = rates.kappa_h
    return N


def _fill(rows: dict[int, tuple[dict[int, complex], dict[int, complex]]], n_z: int, n_noise: int):
    """Build (M, K) from annihilation rows; conjugate rows flip index parity."""
    M = np.zeros((n_z, n_z), dtype=complex)
    K = np.zeros((n_z, n_noise), dtype=complex)
    for r, (zcoef, ncoef) in rows.items():
        for c, v in zcoef.items():
            M[r, c] += v
            M[r ^ 1, c ^ 1] += np.conj(v)
        for c, v in ncoef.items():
            K[r, c] += v
            K[r ^ 1, c ^ 1] += np.conj(v)
    return M, K


def build_generator(
    stage: Stage | str,
    rates: DerivedRates,
    correlated_scattering: bool = True,
) -> StageGenerator:
    """Drift and noise gain of one stage for ``z = (a, a^dag, b, b^dag)``.

    ``correlated_scattering=False`` gives the motion its own copy of the
    recoil noise instead of sharing ``a_-`` with the cavity (used as a
    negative control).
    """
    stage = Stage(stage)
    r = rates
    s2 = math.sqrt(2.0)
    gam = r.cavity_decay
    cav_noise = {IN: math.sqrt(2 * r.kappa)}
    motion_recoil = AM if correlated_scattering else AM2
    if stage is Stage.PULSE1:
        cav_noise[AM] = s2 * np.conj(r.kbar_L)
        rows = {
            A: ({A: -gam, BD: r.chi1}, cav_noise),
            B: ({AD: r.chi1, B: -(r.kappa_b + r.kappa_b_p1 - r.kappa_b_m1)},
                {BT: 1.0, AP: s2 * r.kbar_b_p1, motion_recoil + 1: -s2 * r.kbar_b_m1}),
        }
    elif stage is Stage.DARK:
        cav_noise[AM] = s2 * np.conj(r.kbar_L)
        rows = {
            A: ({A: -gam}, cav_noise),
            B: ({B: 1j * r.delta_1b - r.kappa_b}, {BT: 1.0}),
        }
    else:
        cav_noise[AP] = s2 * np.conj(r.kbar_L)
        rows = {
            A: ({A: -gam, B: r.chi2}, cav_noise),
            B: ({A: -np.conj(r.chi2), B: -(r.kappa_b + r.kappa_b_p2 - r.kappa_b_m2)},
                {BT: 1.0, AP: s2 * r.kbar_b_p2, motion_recoil + 1: -s2 * r.kbar_b_m2}),
        }
    M, K = _fill(rows, 4, len(NOISE))
    return StageGenerator(stage, M, K, noise_correlations(rates))


def _solve(rhs, y0: np.ndarray, t: float) -> np.ndarray:
    if t == 0:
        return y0
    sol = solve_ivp(rhs, (0.0, t), y0, method="DOP853", rtol=RTOL, atol=ATOL)
    if not sol.success:
        raise RuntimeError(f"moment integration failed: {sol.message}")
    return sol.y[:, -1]


def evolve_moments(M: np.ndarray, D: np.ndarray, G0: np.ndarray, t: float) -> np.ndarray:
    n = M.shape[0]

    def rhs(_, y):
        G = y.reshape(n, n)
        return (M @ G + G @ M.T + D).ravel()

    return _solve(rhs, G0.astype(complex).ravel(), t).reshape(n, n)


def evolve_regression(M: np.ndarray, R0: np.ndarray, t: float) -> np.ndarray:
    n = M.shape[0]

    def rhs(_, y):
        return (y.reshape(-1, n) @ M.T).ravel()

    return _solve(rhs, R0.astype(complex).ravel(), t).reshape(R0.shape)


def vacuum_moments(n: int = 4) -> np.ndarray:
    """Ordered moments of the vacuum: ``<c c^dag> = 1`` for each mode."""
    G = np.zeros((n, n), dtype=complex)
    for k in range(0, n, 2):
        G[k, k + 1] = 1.0
    return G


def _apply_hook(gen: StageGenerator, hook: GeneratorHook | None) -> StageGenerator:
    if hook is None:
        return gen
    M, K = hook(gen.stage, gen.drift.copy(), gen.noise_gain.copy())
    return StageGenerator(gen.stage, M, K, gen.noise_corr)


def moment_set(G: np.ndarray, t: float) -> MomentSet:
    return MomentSet(float(G[AD, A].real), float(G[BD, B].real), complex(G[A, B]), complex(G[B, A]),
                     float(G[A, AD].real), t, aa=complex(G[A, A]))


def integrate_moments(gen: StageGenerator, G0: np.ndarray, t: float) -> np.ndarray:
    return evolve_moments(gen.drift, gen.diffusion, G0, t)


@dataclass(frozen=True)
class OracleIntracavity:
    G_T1: np.ndarray
    G_T: np.ndarray
    G_T2: np.ndarray
    after_pulse1: MomentSet
    before_pulse2: MomentSet
    two_time: TwoTimeSet
    V: np.ndarray

    @property
    def commutator_error(self) -> float:
        """Largest deviation of ``<[a, a^dag]>`` and ``<[b, b^dag]>`` from one."""
        errs = [abs(G[k, k + 1] - G[k + 1, k] - 1) for G in (self.G_T1, self.G_T, self.G_T2) for k in (A, B)]
        return float(max(errs))


def regress_two_time(
    gens: dict[Stage, StageGenerator],
    G_T1: np.ndarray,
    schedule: PulseSchedule,
) -> np.ndarray:
    """``<z(T1) z(T2)^T>`` by evolving the later time with the drift alone."""
    R = evolve_regression(gens[Stage.DARK].drift, G_T1, schedule.dark)
    return evolve_regression(gens[Stage.PULSE2].drift, R, schedule.transfer)


def oracle_intracavity(
    rates: DerivedRates,
    schedule: PulseSchedule,
    generator_hook: GeneratorHook | None = None,
    correlated_scattering: bool = True,
) -> OracleIntracavity:
    gens = {s: _apply_hook(build_generator(s, rates, correlated_scattering), generator_hook) for s in Stage}
    G1 = integrate_moments(gens[Stage.PULSE1], vacuum_moments(), schedule.T1)
    GT = integrate_moments(gens[Stage.DARK], G1, schedule.dark)
    G2 = integrate_moments(gens[Stage.PULSE2], GT, schedule.transfer)
    R = regress_two_time(gens, G1, schedule)
    tt = TwoTimeSet(
        n_a_T1=float(G1[AD, A].real),
        n_a_T2=float(G2[AD, A].real),
        a1a2=complex(R[A, A]),
        a1a2dag=complex(R[A, AD]),
        a1dag_a2=complex(R[AD, A]),
        a2a2dagdag=complex(G2[AD, AD]),
    )
    return OracleIntracavity(G1, GT, G2, moment_set(G1, schedule.T1), moment_set(GT, schedule.T), tt,
                             intracavity_cov(tt))


def _augment(gen: StageGenerator, rates: DerivedRates, Tm: float, window: int | None) -> tuple[np.ndarray, np.ndarray]:
    """Drift and diffusion on ``(a, a^dag, b, b^dag, y1, y1^dag, y2, y2^dag)``."""
    M = np.zeros((8, 8), dtype=complex)
    K = np.zeros((8, gen.noise_gain.shape[1]), dtype=complex)
    M[:4, :4] = gen.drift
    K[:4] = gen.noise_gain
    if window is not None:
        y = 4 + 2 * window
        g = 1.0 / math.sqrt(Tm)
        M[y, A] = math.sqrt(2 * rates.kappa) * g
        M[y + 1, AD] = math.sqrt(2 * rates.kappa) * g
        K[y, IN] = -g
        K[y + 1, IND] = -g
    return M, K @ gen.noise_corr @ K.T


def oracle_output_cov(
    rates: DerivedRates,
    schedule: PulseSchedule,
    Tm: float,
    generator_hook: GeneratorHook | None = None,
) -> np.ndarray:
    """Detected covariance from integrating the output modes directly."""
    if Tm > schedule.dark:
        raise ValueError("output modes overlap")
    gens = {s: _apply_hook(build_generator(s, rates), generator_hook) for s in Stage}
    G = np.zeros((8, 8), dtype=complex)
    G[:4, :4] = vacuum_moments()
    segments = [
        (Stage.PULSE1, schedule.T1, None),
        (Stage.DARK, Tm, 0),
        (Stage.DARK, schedule.dark - Tm, None),
        (Stage.PULSE2, schedule.transfer, None),
        (Stage.DARK, Tm, 1),
    ]
    for stage, dt, window in segments:
        M, D = _augment(gens[stage], rates, Tm, window)
        G = evolve_moments(M, D, G, dt)
    return quadrature_cov(ordered_output_moments(G[4:, 4:]))


def ordered_output_moments(Y: np.ndarray) -> np.ndarray:
    """Output-mode moments in the convention of :func:`symmetric_moments`.

    ``Y`` holds ``<w_k w_l>`` for ``w = (y1, y1^dag, y2, y2^dag)``. The
    diagonal blocks use the normally ordered moment plus one half, the
    ``y1 y2`` entries keep the time order (``y2^dag y1^dag`` for the
    conjugate) and the mixed ones are symmetrized.
    With exactly conserved commutators this equals plain symmetrization.
    """
    S = np.zeros((4, 4), dtype=complex)
    for k in (0, 2):
        S[k, k + 1] = S[k + 1, k] = Y[k + 1, k] + 0.5
        S[k, k] = Y[k, k]
        S[k + 1, k + 1] = Y[k + 1, k + 1]
    S[0, 2] = S[2, 0] = Y[0, 2]
    S[1, 3] = S[3, 1] = Y[3, 1]
    S[0, 3] = S[3, 0] = 0.5 * (Y[0, 3] + Y[3, 0])
    S[1, 2] = S[2, 1] = 0.5 * (Y[1, 2] + Y[2, 1])
    return S


def relative_deviation(V_ref: np.ndarray, V: np.ndarray) -> np.ndarray:
    """Elementwise ``|dV| / max(|V_ref|, 1/2)``; the floor is the vacuum level."""
    return np.abs(V - V_ref) / np.maximum(np.abs(V_ref), 0.5)


@dataclass(frozen=True)
class OracleComparison:
    V_oracle: np.ndarray
    V_analytic: np.ndarray
    max_rel_err: float
    worst_index: tuple[int, int]

    @property
    def passed(self) -> bool:
        return self.max_rel_err <= DEVIATION_LIMIT

    def report(self) -> str:
        i, j = self.worst_index
        status = "ok" if self.passed else "DEVIATION"
        return (f"{status}: max relative error {self.max_rel_err:.3e} at V[{i + 1},{j + 1}] "
                f"(analytic {self.V_analytic[i, j]:.12g}, oracle {self.V_oracle[i, j]:.12g})")


def compare(V_analytic: np.ndarray, V_oracle: np.ndarray) -> OracleComparison:
    err = relative_deviation(V_oracle, V_analytic)
    idx = np.unravel_index(int(np.argmax(err)), err.shape)
    return OracleComparison(V_oracle, V_analytic, float(err[idx]), (int(idx[0]), int(idx[1])))
