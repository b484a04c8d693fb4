"""Gaussian entanglement measures for two modes.

Covariance matrices use the ordering ``(X1, P1, X2, P2)`` with vacuum equal
to ``I / 2``. The logarithmic negativity uses the natural logarithm.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

ENTANGLEMENT_MARGIN = 1e-12

OMEGA = np.kron(np.eye(2), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def blocks(V: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    V = np.asarray(V, dtype=float)
    return V[:2, :2], V[2:, 2:], V[:2, 2:]


def sigma_invariant(V: np.ndarray) -> float:
    """``det A + det B - 2 det C``, the invariant of the partially transposed state."""
    A, B, C = blocks(V)
    return float(np.linalg.det(A) + np.linalg.det(B) - 2 * np.linalg.det(C))


def _eta_minus_invariants(V: np.ndarray) -> float:
    sigma = sigma_invariant(V)
    det_v = float(np.linalg.det(np.asarray(V, dtype=float)))
    disc = sigma * sigma - 4 * det_v
    if disc < 0:
        if disc < -1e-12 * max(1.0, sigma * sigma):
            warnings.warn(f"negative discriminant {disc:.3g} clamped to zero", stacklevel=3)
        disc = 0.0
    inner = sigma - math.sqrt(disc)
    return math.sqrt(max(inner, 0.0) / 2)


def eta_minus(V: np.ndarray) -> float:
    """Smallest symplectic eigenvalue of the partial transpose.

    Uses the Hermitian form of the symplectic spectrum, which stays accurate
    when the two eigenvalues nearly coincide. Matrices that are not positive
    definite fall back to the closed form in ``Sigma`` and ``det V``.
    """
    spectrum = _hermitian_symplectic_spectrum(partial_transpose(V))
    if spectrum is None:
        return _eta_minus_invariants(V)
    return float(spectrum[0])


def log_negativity(V: np.ndarray) -> float:
    eta = eta_minus(V)
    if eta <= 0:
        return math.inf
    return max(0.0, -math.log(2 * eta))


def is_entangled(V: np.ndarray) -> bool:
    return eta_minus(V) < 0.5 - ENTANGLEMENT_MARGIN


def simon_check(V: np.ndarray) -> tuple[float, float, bool]:
    """Both sides of ``4 det V < Sigma - 1/4`` and whether it holds."""
    lhs = 4 * float(np.linalg.det(np.asarray(V, dtype=float)))
    rhs = sigma_invariant(V) - 0.25
    return lhs, rhs, lhs < rhs - ENTANGLEMENT_MARGIN * max(1.0, abs(rhs))


def epr_variance(V: np.ndarray) -> float:
    """``[Var(X1 - X2) + Var(P1 + P2)] / 2``; one for vacuum."""
    V = np.asarray(V, dtype=float)
    return 0.5 * (V[0, 0] + V[2, 2] - 2 * V[0, 2] + V[1, 1] + V[3, 3] + 2 * V[1, 3])


def _hermitian_symplectic_spectrum(V: np.ndarray) -> np.ndarray | None:
    """Symplectic spectrum from ``V^1/2 (i Omega) V^1/2``; ``None`` unless ``V > 0``."""
    V = np.asarray(V, dtype=float)
    w, U = np.linalg.eigh(0.5 * (V + V.T))
    if w.min() <= 0:
        return None
    root = (U * np.sqrt(w)) @ U.T
    ev = np.linalg.eigvalsh(root @ (1j * OMEGA) @ root)
    return np.sort(np.abs(ev))[::2]


def symplectic_eigenvalues(V: np.ndarray) -> np.ndarray:
    """Symplectic spectrum of a two-mode covariance matrix, ascending."""
    spectrum = _hermitian_symplectic_spectrum(V)
    if spectrum is not None:
        return spectrum
    ev = np.abs(np.linalg.eigvals(1j * OMEGA @ np.asarray(V, dtype=float)))
    return np.sort(ev)[::2]


def partial_transpose(V: np.ndarray) -> np.ndarray:
    flip = np.diag([1.0, 1.0, 1.0, -1.0])
    return flip @ np.asarray(V, dtype=float) @ flip


def is_physical(V: np.ndarray, tol: float = 1e-9) -> bool:
    """Uncertainty relation ``V + i Omega / 2 >= 0``.

    This also rejects matrices that are not positive semidefinite, which the
    symplectic spectrum alone would miss.
    """
    V = np.asarray(V, dtype=float)
    if not np.allclose(V, V.T, atol=tol):
        return False
    return bool(np.linalg.eigvalsh(V + 0.5j * OMEGA).min() >= -tol)


def two_mode_squeezed(r: float) -> np.ndarray:
    """Covariance matrix of the two-mode squeezed vacuum with squeezing ``r``."""
    c, s = math.cosh(2 * r) / 2, math.sinh(2 * r) / 2
    return np.array([[c, 0, s, 0], [0, c, 0, -s], [s, 0, c, 0], [0, -s, 0, c]])


def local_rotation(phi1: float, phi2: float) -> np.ndarray:
    def rot(p):
        return np.array([[math.cos(p), math.sin(p)], [-math.sin(p), math.cos(p)]])

    R = np.zeros((4, 4))
    R[:2, :2], R[2:, 2:] = rot(phi1), rot(phi2)
    return R


@dataclass(frozen=True)
class EntanglementReport:
    eta_minus: float
    E_N: float
    entangled: bool
    simon_lhs: float
    simon_rhs: float
    xi_EPR: float
    nbar_pulse1: float
    nbar_pulse2: float


def entanglement_report(V: np.ndarray, nbar_pulse1: float = math.nan, nbar_pulse2: float = math.nan) -> EntanglementReport:
    eta = eta_minus(V)
    lhs, rhs, _ = simon_check(V)
    return EntanglementReport(
        eta_minus=eta,
        E_N=max(0.0, -math.log(2 * eta)) if eta > 0 else math.inf,
        entangled=eta < 0.5 - ENTANGLEMENT_MARGIN,
        simon_lhs=lhs,
        simon_rhs=rhs,
        xi_EPR=epr_variance(V),
        nbar_pulse1=nbar_pulse1,
        nbar_pulse2=nbar_pulse2,
    )
