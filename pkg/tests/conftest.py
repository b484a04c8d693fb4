import warnings

import numpy as np
import pytest

from entangled_pulses.model import REFERENCE_KAPPAS_HZ, TWO_PI, derive_rates, reference_params
from entangled_pulses.protocol import figure_schedule


@pytest.fixture(autouse=True)
def _quiet_warnings():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        yield


def reference_rates(kappa_hz=800.0, **kw):
    return derive_rates(reference_params(kappa_hz), **kw)


def nearly_lossless_rates(chi_hz=8e3, kappa_hz=1e-9):
    """Noiseless rates with a negligible cavity decay and a chosen |chi|."""
    omega = chi_hz * 120e6 / (0.1 * 1e6)
    params = reference_params(kappa_hz, omega1=omega, omega2=omega)
    return derive_rates(params, noiseless=True)


@pytest.fixture(params=REFERENCE_KAPPAS_HZ, ids=lambda k: f"kappa{k:g}Hz")
def ref_rates(request):
    return reference_rates(request.param)


@pytest.fixture
def ref_schedule(ref_rates):
    return figure_schedule(ref_rates, 40e-6)


def random_physical_cov(rng, entangled=None):
    """Random two-mode covariance ``S diag(n1, n1, n2, n2) S^T`` with symplectic ``S``."""
    from entangled_pulses.entanglement import local_rotation, two_mode_squeezed

    n1, n2 = 0.5 + rng.exponential(0.5, 2)
    r = rng.uniform(0, 1.2)
    base = np.diag([n1, n1, n2, n2])
    S = two_mode_squeezed(r / 2) * 2  # sqrt of the TMS covariance factor
    s1, s2 = rng.uniform(-0.5, 0.5, 2)
    local = np.diag([np.exp(s1), np.exp(-s1), np.exp(s2), np.exp(-s2)])
    R1 = local_rotation(*rng.uniform(0, 2 * np.pi, 2))
    R2 = local_rotation(*rng.uniform(0, 2 * np.pi, 2))
    M = R2 @ local @ R1 @ S
    return M @ base @ M.T


__all__ = ["TWO_PI", "reference_rates", "nearly_lossless_rates", "random_physical_cov"]


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
