"""Kicked wavelet rotor: dynamical localization and the algebraic tail.

Run with ``python3 tutorials/03_map_and_localization.py``.
"""

import numpy as np

from qwtsim import MapParams, build_map_circuit, count_gates
from qwtsim.analysis import momentum_profile
from qwtsim.experiments import ipr_run, tail_run
from qwtsim.rotor import evolve, initial_state

p = MapParams(nq=8, T=1.4, k=1.0)
print("one map step:", count_gates(build_map_circuit(p)))

# Gate-level and oracle evolution agree; the ancilla stays in |0>.
rec = evolve(initial_state(p), p, steps=50)
print("gate-level IPR after 50 steps:", round(rec.ipr[-1], 3))
rec, _, _ = ipr_run(8, 1.0, 50)[:3]
print("oracle IPR after 50 steps:   ", round(rec.ipr[-1], 3))

# The windowed IPR saturates: the wave packet stops spreading.
rec, wt, wx, trend = ipr_run(10, 1.0, 2000, window=50)
print("windowed IPR:", np.round(wx[::8], 1))
print(f"trend slope {trend.slope:.1e}, AR(1)-adjusted p={trend.pvalue:.2f}")

# Localized profile with a power-law tail instead of an exponential one.
probs, fit = tail_run(10, 1.0, 1000)
n, w = momentum_profile(probs)
print(f"tail slope {fit.slope:.2f} over |n| in {fit.window}")
print("W(n) at n=1,10,100:", w[[1, 10, 100]])
