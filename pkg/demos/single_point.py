# ---
# jupyter:
#   jupytext:
#     formats: py:percent
#   kernelspec:
#     display_name: Python 3
#     language: python
#     name: python3
# ---

# %% [markdown]
# # One schedule, end to end
#
# Derive the effective rates for the reference parameter set, run one pulse
# schedule through the closed-form pipeline and check the output covariance
# against the moment-equation integrator.

# %%
import warnings

import numpy as np

from entangled_pulses.model import TWO_PI, derive_rates, reference_params, validate_regime
from entangled_pulses.oracle import compare, oracle_output_cov
from entangled_pulses.protocol import figure_schedule, run_point

np.set_printoptions(precision=4, suppress=True)

# %% [markdown]
# ## Rates
#
# All rates are angular frequencies; divide by 2 pi for Hz.

# %%
params = reference_params(kappa_hz=6400.0)
rates = derive_rates(params)
print(f"|chi1| / 2pi = {abs(rates.chi1) / TWO_PI:.1f} Hz")
print(f"kappa_L / 2pi = {rates.kappa_L / TWO_PI:.1f} Hz")
for d in validate_regime(params, rates):
    print(f"{d.name:>20s}: {d.status.value}")

# %% [markdown]
# ## Schedule and output state
#
# 40 us first pulse, two cavity lifetimes of darkness, then the optimal
# transfer duration.

# %%
schedule = figure_schedule(rates, 40e-6)
with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    result = run_point(params, schedule, rates=rates)
print(f"T1 = {schedule.T1 * 1e6:.1f} us, T = {schedule.T * 1e6:.1f} us, T2 = {schedule.T2 * 1e6:.1f} us")
print(f"window Tm = {result.window.Tm * 1e6:.1f} us, alpha = {result.window.alpha:.4f}")
print(f"E_N = {result.report.E_N:.4f}, xi_EPR = {result.report.xi_EPR:.4f}")
print(result.V_out)

# %% [markdown]
# ## Independent check
#
# Integrate the linear moment equations stage by stage and compare.

# %%
check = compare(result.V_out, oracle_output_cov(rates, schedule, result.window.Tm))
print(check.report())
