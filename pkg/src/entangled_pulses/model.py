"""Physical inputs, effective rates and regime diagnostics.

All quantities handled here are angular frequencies (rad/s) unless a
function name says otherwise. Conversions from ordinary frequencies happen
at the boundary (:func:`from_hz`, the config loader and the presets).

Conventions
-----------
* ``delta1`` is the signed laser-atom detuning of the first pulse,
  ``omega_L1 - omega_0``; the reference setting is red detuned (negative).
* ``delta2`` defaults to ``delta1 - 2 nu`` (second pulse on the anti-Stokes
  resonance) unless ``delta2_override`` is given.
* ``kappa_h`` is the heating rate; ``kappa_b`` defaults to ``kappa_h / 2000``
  so that the thermal occupation of the motional bath is 1000.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from enum import Enum

import numpy as np

TWO_PI = 2.0 * math.pi

#: ratio thresholds used by :func:`validate_regime` (pass, warn)
PASS_RATIO = 10.0
WARN_RATIO = 3.0

DEFAULT_THERMAL_OCCUPATION = 1000.0


class ChiLevel(str, Enum):
    EXACT = "exact"
    LEADING = "leading"


@dataclass(frozen=True)
class PhysicalParams:
    """Laboratory inputs of the single-atom source (angular units).

    Attributes
    ----------
    gamma, kappa, nu : float
        Dipole linewidth, cavity field decay rate, trap frequency.
    kappa_h : float
        Heating rate of the trapped motion (phonons per unit time).
    kappa_b : float or None
        Motional damping rate; ``None`` selects ``kappa_h / 2000``.
    eta : float
        Lamb-Dicke parameter.
    g_c, omega1, omega2 : complex
        Vacuum Rabi coupling and Rabi frequencies of the two pulses.
    delta1 : float
        Signed laser-atom detuning of the first pulse.
    delta2_override : float or None
        Laser-atom detuning of the second pulse; ``None`` means
        ``delta1 - 2 nu``.
    theta_L, theta_c, phi_c : float
        Laser/trap-axis angle, cavity/trap-axis angle and trap position
        phase inside the standing wave.
    """

    gamma: float
    kappa: float
    nu: float
    eta: float
    g_c: complex
    omega1: complex
    omega2: complex
    delta1: float
    kappa_h: float = 0.0
    kappa_b: float | None = None
    delta2_override: float | None = None
    theta_L: float = 0.0
    theta_c: float = math.pi / 2
    phi_c: float = 0.0

    def __post_init__(self):
        if self.kappa_b is None:
            object.__setattr__(self, "kappa_b", self.kappa_h / (2.0 * DEFAULT_THERMAL_OCCUPATION))
        for name in ("gamma", "kappa", "nu"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)!r}")
        if self.kappa_b < 0 or self.kappa_h < 0:
            raise ValueError("kappa_b and kappa_h must be non-negative")
        if not 0 < abs(self.eta) < 1:
            raise ValueError(
                f"Lamb-Dicke parameter must satisfy 0 < |eta| < 1 for the expansion to hold, got {self.eta}"
            )
        for name in ("theta_L", "theta_c", "phi_c"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"angle {name} must be finite")
        if self.delta1 == 0 or self.delta2 == 0:
            raise ValueError("laser-atom detunings must be non-zero")

    @property
    def delta2(self) -> float:
        if self.delta2_override is not None:
            return self.delta2_override
        return self.delta1 - 2.0 * self.nu

    @property
    def thermal_occupation(self) -> float:
        """Mean occupation of the motional bath, ``kappa_h / (2 kappa_b)``."""
        if self.kappa_b == 0:
            return math.inf if self.kappa_h > 0 else 0.0
        return self.kappa_h / (2.0 * self.kappa_b)

    def with_(self, **changes) -> "PhysicalParams":
        return replace(self, **changes)


# fields given as ordinary frequencies in config files and presets
FREQUENCY_FIELDS = (
    "gamma", "kappa", "nu", "kappa_h", "kappa_b", "g_c", "omega1", "omega2",
    "delta1", "delta2_override",
)
ANGLE_FIELDS = ("theta_L", "theta_c", "phi_c")
DIMENSIONLESS_FIELDS = ("eta",)


def param_names() -> tuple[str, ...]:
    return tuple(f.name for f in fields(PhysicalParams))


def from_hz(**values) -> PhysicalParams:
    """Build :class:`PhysicalParams` from ordinary frequencies (Hz)."""
    converted = {}
    for key, value in values.items():
        if key in FREQUENCY_FIELDS and value is not None:
            value = TWO_PI * value
        converted[key] = value
    return PhysicalParams(**converted)


def reference_params(kappa_hz: float = 800.0, **overrides) -> PhysicalParams:
    """Reference parameter set of the time-bin entanglement scheme.

    ``(|Delta|, gamma, Omega, g_c, nu) = 2 pi (120, 5, 10, 1, 1) MHz``,
    ``eta = 0.1``, ``kappa_h = 2 pi 20 Hz``, laser along the trap axis and
    cavity orthogonal to it with the trap at an antinode. The same detuning
    magnitude is used for both pulses (this is what makes ``|chi_1| = |chi_2|``).

    Keyword overrides are given in Hz / radians like the config file.
    """
    values = dict(
        gamma=5e6,
        kappa=kappa_hz,
        nu=1e6,
        eta=0.1,
        g_c=1e6,
        omega1=10e6,
        omega2=10e6,
        delta1=-120e6,
        delta2_override=-120e6,
        kappa_h=20.0,
        theta_L=0.0,
        theta_c=math.pi / 2,
        phi_c=0.0,
    )
    values.update(overrides)
    return from_hz(**values)


#: cavity decay rates (Hz) of the four noisy reference curves
REFERENCE_KAPPAS_HZ = (16e3, 11e3, 6.4e3, 0.8e3)


@dataclass(frozen=True)
class DerivedRates:
    """Effective couplings, loss rates, noise amplitudes and shifts (rad/s).

    Noise amplitudes (``kbar_*``) carry units of sqrt(rad/s) so that the
    matching rate is their squared modulus.
    """

    params: PhysicalParams = field(repr=False)
    chi_level: ChiLevel
    noiseless: bool
    chi1: complex
    chi2: complex
    chi1_exact: complex
    chi1_leading: complex
    chi2_exact: complex
    chi2_leading: complex
    kappa_L: float
    kbar_L: complex
    kappa_b_p1: float
    kappa_b_m1: float
    kappa_b_p2: float
    kappa_b_m2: float
    kbar_b_p1: complex
    kbar_b_m1: complex
    kbar_b_p2: complex
    kbar_b_m2: complex
    delta_prime: float
    delta_nu: float
    nu_prime: float
    delta_1b: float
    delta_2b: float
    kappa_1S: float
    kappa_1D: float
    kappa_2S: float
    kappa_2D: float
    theta_1: float
    theta_2: complex

    # noise-free runs zero these while keeping the cavity decay
    @property
    def kappa(self) -> float:
        return self.params.kappa

    @property
    def kappa_h(self) -> float:
        return 0.0 if self.noiseless else self.params.kappa_h

    @property
    def kappa_b(self) -> float:
        return 0.0 if self.noiseless else self.params.kappa_b

    @property
    def cavity_decay(self) -> float:
        """Total intracavity field decay rate ``kappa + kappa_L``."""
        return self.kappa + self.kappa_L


def _stark_shift(delta: float, omega_sq: float, nu_eff: float, gamma: float, eta: float, cos_L: float) -> float:
    """Laser-induced frequency shift of the motion for detuning ``delta``."""
    g4 = gamma * gamma / 4.0
    x = g4 + delta * delta - nu_eff * nu_eff
    first = x / (x * x + nu_eff * nu_eff * gamma * gamma)
    return 2.0 * eta * eta * omega_sq * cos_L * cos_L * delta * (first - 1.0 / (delta * delta + g4))


def _raman_coupling(eta, omega, g_c, phi_c, theta_L, theta_c, denom_axial, denom_transverse):
    # cos(phi_c) tan(phi_c) written as sin(phi_c) to stay finite at phi_c = pi/2
    return eta * omega * np.conj(g_c) * (
        math.cos(phi_c) * math.cos(theta_L) / denom_axial
        + 1j * math.sin(phi_c) * math.cos(theta_c) / denom_transverse
    )


def derive_rates(
    params: PhysicalParams,
    chi_level: ChiLevel | str = ChiLevel.LEADING,
    noiseless: bool = False,
) -> DerivedRates:
    """Evaluate every effective rate of the adiabatically eliminated model.

    Parameters
    ----------
    params : PhysicalParams
    chi_level : {"exact", "leading"}
        ``exact`` keeps the ``nu'`` and ``gamma/2`` terms in the Raman
        couplings; ``leading`` uses ``eta Omega g* / Delta``.
    noiseless : bool
        Zero the scattering losses, the recoil noise and the heating while
        keeping the couplings and the cavity decay (comparison curves).
    """
    chi_level = ChiLevel(chi_level)
    p = params
    gamma, nu, eta = p.gamma, p.nu, p.eta
    d1, d2 = p.delta1, p.delta2
    cos_L, _cos_c, cos_phi = math.cos(p.theta_L), math.cos(p.theta_c), math.cos(p.phi_c)
    om1_sq, om2_sq = abs(p.omega1) ** 2, abs(p.omega2) ** 2
    g_sq = abs(p.g_c) ** 2
    g4 = gamma * gamma / 4.0
    sg = math.sqrt(gamma / 2.0)

    # first-order sideband renormalization, evaluated with the bare trap frequency
    delta_nu = _stark_shift(d1, om1_sq, nu, gamma, eta, cos_L)
    nu_p = nu + delta_nu

    chi1_exact = complex(_raman_coupling(eta, p.omega1, p.g_c, p.phi_c, p.theta_L, p.theta_c,
                                         d1 - nu_p + 0.5j * gamma, d1 + 0.5j * gamma))
    chi1_leading = complex(_raman_coupling(eta, p.omega1, p.g_c, p.phi_c, p.theta_L, p.theta_c, d1, d1))
    chi2_exact = complex(_raman_coupling(eta, p.omega2, p.g_c, p.phi_c, p.theta_L, p.theta_c,
                                         d2 + nu_p + 0.5j * gamma, d2 + 0.5j * gamma))
    chi2_leading = complex(_raman_coupling(eta, p.omega2, p.g_c, p.phi_c, p.theta_L, p.theta_c, d2, d2))
    if chi_level is ChiLevel.EXACT:
        chi1, chi2 = chi1_exact, chi2_exact
    else:
        chi1, chi2 = chi1_leading, chi2_leading

    kappa_L = 0.5 * gamma * g_sq * cos_phi**2 / (g4 + (d1 - nu_p) ** 2)
    kbar_L = complex(-sg * p.g_c * cos_phi / (0.5 * gamma + 1j * (d1 - nu_p)))

    def scatter(om_sq, det):
        return eta**2 * 0.5 * gamma * om_sq * cos_L**2 / (g4 + det**2)

    kb_p1, kb_m1 = scatter(om1_sq, d1 + nu_p), scatter(om1_sq, d1 - nu_p)
    kb_p2, kb_m2 = scatter(om2_sq, d2 + nu_p), scatter(om2_sq, d2 - nu_p)
    kbar_p1 = complex(1j * eta * sg * p.omega1 * cos_L / (0.5 * gamma - 1j * (d1 + nu_p)))
    kbar_m1 = complex(-1j * eta * sg * p.omega1 * cos_L / (0.5 * gamma + 1j * (d1 - nu_p)))
    kbar_p2 = complex(1j * eta * sg * np.conj(p.omega2) * cos_L / (0.5 * gamma - 1j * (d2 + nu_p)))
    kbar_m2 = complex(-1j * eta * sg * p.omega2 * cos_L / (0.5 * gamma + 1j * (d2 - nu_p)))

    delta_prime = (d1 - nu_p) * g_sq * cos_phi**2 / (g4 + (d1 - nu_p) ** 2)
    delta_1b = _stark_shift(d1, om1_sq, nu_p, gamma, eta, cos_L)
    delta_2b = _stark_shift(d2, om2_sq, nu_p, gamma, eta, cos_L)

    if noiseless:
        kappa_L = kb_p1 = kb_m1 = kb_p2 = kb_m2 = 0.0
        kbar_L = kbar_p1 = kbar_m1 = kbar_p2 = kbar_m2 = 0j
        kappa_b = 0.0
    else:
        kappa_b = p.kappa_b

    kappa = p.kappa
    k1S = 0.5 * (kappa + kappa_L + kappa_b + kb_p1 - kb_m1)
    k1D = 0.5 * (kappa + kappa_L - kappa_b - kb_p1 + kb_m1)
    k2S = 0.5 * (kappa + kappa_L + kappa_b + kb_p2 - kb_m2)
    k2D = 0.5 * (kappa + kappa_L - kappa_b - kb_p2 + kb_m2)
    theta_1 = math.sqrt(abs(chi1) ** 2 + k1D**2)
    theta_2 = complex(np.sqrt(complex(abs(chi2) ** 2 - k2D**2)))

    return DerivedRates(
        params=p,
        chi_level=chi_level,
        noiseless=noiseless,
        chi1=chi1,
        chi2=chi2,
        chi1_exact=chi1_exact,
        chi1_leading=chi1_leading,
        chi2_exact=chi2_exact,
        chi2_leading=chi2_leading,
        kappa_L=kappa_L,
        kbar_L=kbar_L,
        kappa_b_p1=kb_p1,
        kappa_b_m1=kb_m1,
        kappa_b_p2=kb_p2,
        kappa_b_m2=kb_m2,
        kbar_b_p1=kbar_p1,
        kbar_b_m1=kbar_m1,
        kbar_b_p2=kbar_p2,
        kbar_b_m2=kbar_m2,
        delta_prime=delta_prime,
        delta_nu=delta_nu,
        nu_prime=nu_p,
        delta_1b=delta_1b,
        delta_2b=delta_2b,
        kappa_1S=k1S,
        kappa_1D=k1D,
        kappa_2S=k2S,
        kappa_2D=k2D,
        theta_1=theta_1,
        theta_2=theta_2,
    )


class Status(str, Enum):
    PASS = "pass"
    WARN = "warn"
    FAIL = "fail"


@dataclass(frozen=True)
class Diagnostic:
    name: str
    status: Status
    ratio: float
    message: str


def _grade(ratio: float) -> Status:
    if ratio >= PASS_RATIO:
        return Status.PASS
    if ratio >= WARN_RATIO:
        return Status.WARN
    return Status.FAIL


def _ratio(big: float, small: float) -> float:
    if small == 0:
        return math.inf if big > 0 else 0.0
    return big / small


def validate_regime(
    params: PhysicalParams,
    rates: DerivedRates,
    photon_number: float = 1.0,
) -> list[Diagnostic]:
    """Check the approximations behind the effective Langevin equations.

    ``photon_number`` is the caller's estimate of the mean intracavity photon
    number, used for the cavity-recoil (nonlinear noise) condition. Each
    check grades ``ratio >= 10`` as pass and ``ratio >= 3`` as warn.
    """
    p = params
    out = []
    for j, (delta, omega) in enumerate(((p.delta1, p.omega1), (p.delta2, p.omega2)), start=1):
        r = _ratio(abs(delta), max(abs(omega), abs(p.g_c), p.gamma))
        out.append(Diagnostic(f"far_detuning_{j}", _grade(r), r,
                              f"|Delta{j}| / max(|Omega{j}|, |g_c|, gamma) = {r:.3g}"))
    r = _ratio(p.nu, max(p.kappa, p.kappa_b))
    out.append(Diagnostic("sideband_resolution", _grade(r), r, f"nu / max(kappa, kappa_b) = {r:.3g}"))
    r = _ratio(1.0, abs(p.eta))
    out.append(Diagnostic("lamb_dicke", _grade(r), r, f"1 / eta = {r:.3g}"))
    r = _ratio(p.nu, abs(rates.delta_nu))
    out.append(Diagnostic("small_sideband_shift", _grade(r), r, f"nu / |delta_nu| = {r:.3g}"))
    for j, omega in enumerate((p.omega1, p.omega2), start=1):
        drive = abs(omega * math.cos(p.theta_L))
        recoil = abs(p.g_c) * math.sqrt(max(photon_number, 0.0)) * abs(math.cos(p.theta_c))
        r = _ratio(drive, recoil)
        out.append(Diagnostic(f"cavity_recoil_{j}", _grade(r), r,
                              f"|Omega{j} cos theta_L| / (|g_c| sqrt(n) |cos theta_c|) = {r:.3g}"))
    return out


def resonance_frequencies(params: PhysicalParams, rates: DerivedRates) -> tuple[float, float]:
    """Laser-cavity detunings at which the two effective resonances hold.

    Returns ``(omega_L1 - omega_c, omega_L2 - omega_c)``.
    """
    d1 = rates.delta_prime + params.nu + rates.delta_nu
    d2 = rates.delta_prime - params.nu - rates.delta_2b
    return d1, d2


@dataclass(frozen=True)
class PulseSchedule:
    """Switching times of the protocol (seconds).

    The first pulse runs on ``[0, T1]``, the laser is off on ``[T1, T]`` and
    the second pulse runs on ``[T, T2]``.
    """

    T1: float
    T: float
    T2: float

    def __post_init__(self):
        if not (0 < self.T1 <= self.T <= self.T2):
            raise ValueError(f"schedule must satisfy 0 < T1 <= T <= T2, got {self}")

    @property
    def dark(self) -> float:
        return self.T - self.T1

    @property
    def transfer(self) -> float:
        return self.T2 - self.T

    @classmethod
    def from_durations(cls, T1: float, dark: float, transfer: float) -> "PulseSchedule":
        return cls(T1, T1 + dark, T1 + dark + transfer)
