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
# # Entanglement versus the three schedule knobs
#
# Sweep the second-pulse duration, the dark separation and the first-pulse
# duration for four cavity decay rates plus a noiseless comparison curve.
# Figures are written next to this file.

# %%
import warnings
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from entangled_pulses.sweeps import figure_summary, reproduce_figure

out_dir = Path(__file__).resolve().parent if "__file__" in globals() else Path(".").resolve()
AXES = {
    3: ("(T2 - T) / dT2opt", 1.0),
    4: ("T - T1 (ms)", 1e3),
    5: ("T1 (us)", 1e6),
}

# %%
for which, (xlabel, scale) in AXES.items():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        curves = reproduce_figure(which)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for c in curves:
        ax.plot(c.values * scale, c.E_N, "k--" if c.noiseless else "-", label=c.label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("E_N")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(out_dir / f"curves_{which}.png", dpi=120)
    plt.close(fig)
    for entry in figure_summary(which, curves):
        print(which, entry)
