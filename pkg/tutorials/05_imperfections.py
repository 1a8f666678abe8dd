"""Gate noise and static imperfections: fidelity timescales and their scaling.

Run with ``python3 tutorials/05_imperfections.py`` (about a minute).
"""

import numpy as np

from qwtsim import MapParams, NoisyGates, PseudoStatic, Static
from qwtsim.analysis import NoisyLaw, StaticLaw, fidelity_decay_shape, threshold_epsilon_s
from qwtsim.experiments import run_scan_task, scan_tasks, summarise_scan
from qwtsim.rotor import evolve, fidelity_timescale, initial_state

p = MapParams(6)

# Random noise decays exponentially, static disorder like a gaussian.
for model in (NoisyGates(2e-2, 0), Static(2e-3, 0.0, 0)):
    rec = evolve(initial_state(p), p, model, 200)
    print(type(model).__name__, fidelity_decay_shape(rec.fidelity, rec.times).kind)

# Gate-resolved timescale for a single run.
r = fidelity_timescale(p, PseudoStatic(1e-2, 0), 10000)
print(f"pseudo-static: t_f={r.t_f_gates:.2f} iterations, N_g={r.n_total:.0f} gates")

# Small scans and the two scaling laws.
eps = np.logspace(-3, -1.5, 4)
noisy = [run_scan_task(t) for t in scan_tasks((5, 6), "noisy", eps, (0,))]
static = [run_scan_task(t) for t in scan_tasks((5, 6), "static", eps, (0,))]
_, fn = summarise_scan(noisy, NoisyLaw())
_, fs = summarise_scan(static, StaticLaw())
print(f"noisy:  gamma={fn.exponent:.2f}, C={fn.constant:.2f}")
print(f"static: gamma={fs.exponent:.2f}, D={fs.constant:.2f}")

# Residual-error threshold for a static-dominated device.
print(threshold_epsilon_s(1e-2, 10, 5, 4.5))
