"""Experiment drivers shared by the command line, tutorials and acceptance checks."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .analysis import (
    MAX_EIG_QUBITS,
    MAX_UNITARY_QUBITS,
    ScalingPoint,
    build_full_unitary,
    fit_scaling,
    level_spacing_stats,
    linear_trend,
    matrix_element_decay,
    quasi_energy_spectrum,
    tail_fit,
    window_average,
)
from .gates import count_gates
from .harness import PAPER_NG, ResourceError
from .noise import parse_noise
from .rotor import (
    MapParams,
    build_map_circuit,
    build_qwt_cached,
    evolve,
    evolve_exact,
    fidelity_timescale,
    initial_state,
)

__all__ = [
    "GateCountRow",
    "gate_count_table",
    "cubic_fit",
    "ScanTask",
    "ScanResult",
    "run_scan_task",
    "scan_tasks",
    "summarise_scan",
    "ipr_run",
    "probability_run",
    "decay_run",
    "spectrum_run",
    "coarse_grain",
    "MAX_EVOLVE_QUBITS",
]

MAX_EVOLVE_QUBITS = 20


def _guard(nq: int, limit: int, what: str):
    if nq > limit:
        raise ResourceError(f"{what}: n_q = {nq} exceeds the guard {limit}")


# --------------------------------------------------------------------------
# gate counts


@dataclass
class GateCountRow:
    nq: int
    n_g: int
    qwt: int
    phases: int
    paper: int | None

    @property
    def deviation(self) -> float | None:
        return None if self.paper is None else (self.n_g - self.paper) / self.paper


def gate_count_table(nqs) -> list:
    rows = []
    for nq in nqs:
        _guard(nq, 24, "gate-counts")
        n_g = count_gates(build_map_circuit(MapParams(nq))).total
        q = count_gates(build_qwt_cached(nq)).total
        rows.append(GateCountRow(nq, n_g, q, n_g - 2 * q, PAPER_NG.get(nq)))
    return rows


def cubic_fit(nqs, counts):
    """Least-squares cubic; returns ``(coefficients, max relative residual)``."""
    x, y = np.asarray(nqs, float), np.asarray(counts, float)
    coef = np.polyfit(x, y, 3)
    rel = np.abs(np.polyval(coef, x) - y) / y
    return coef, float(rel.max())


# --------------------------------------------------------------------------
# fidelity timescale scans


@dataclass(frozen=True)
class ScanTask:
    nq: int
    model: str
    eps: float
    mu: float
    seed: int
    T: float = 1.4
    k: float = 1.0
    max_steps: int = 100000
    threshold: float = 0.9


@dataclass
class ScanResult:
    task: ScanTask
    n_g: int
    N_g: float
    t_f: float
    t_f_iter: float


def run_scan_task(task: ScanTask) -> ScanResult:
    """Gate-resolved fidelity timescale for one ``(n_q, model, eps, seed)``."""
    _guard(task.nq, MAX_EVOLVE_QUBITS, "fidelity-scan")
    p = MapParams(task.nq, task.T, task.k)
    r = fidelity_timescale(p, parse_noise(task.model, task.eps, task.mu, task.seed),
                           task.max_steps, task.threshold)
    return ScanResult(task, r.n_g, r.n_total, r.t_f_gates, r.t_f)


def scan_tasks(nqs, model, eps_values, seeds, mu="0", T=1.4, k=1.0, max_steps=100000,
               threshold=0.9) -> list:
    out = []
    for nq in nqs:
        for e in eps_values:
            m = e if mu == "eps" else float(mu)
            for s in seeds:
                out.append(ScanTask(nq, model, float(e), m, int(s), T, k, max_steps, threshold))
    return out


def summarise_scan(results, law):
    """Seed-averaged ``ScalingPoint`` per ``(n_q, eps)`` and the law fit (or ``None``)."""
    groups = {}
    for r in results:
        groups.setdefault((r.task.nq, r.task.eps), []).append(r)
    pts = []
    for (nq, e), rs in sorted(groups.items()):
        tf = [r.t_f for r in rs]
        mean = float(np.mean(tf)) if all(math.isfinite(v) for v in tf) else math.inf
        pts.append(ScalingPoint(e, nq, rs[0].n_g, mean))
    try:
        fit = fit_scaling(pts, law)
    except ValueError:
        fit = None
    return pts, fit


# --------------------------------------------------------------------------
# dynamics


def ipr_run(nq, k, steps, model="ideal", eps=0.0, mu=0.0, seed=0, T=1.4, window=50,
            record_every=1, gate_level=None, snapshot_times=()):
    """``(times, xi, window_t, window_xi, trend)``.

    Ideal runs use the classical oracle unless ``gate_level`` is true.
    """
    _guard(nq, MAX_EVOLVE_QUBITS, "evolve")
    p = MapParams(nq, T, k)
    init = initial_state(p)
    if model == "ideal" and not gate_level:
        rec = evolve_exact(init, p, steps, record_every, snapshot_times)
    else:
        rec = evolve(init, p, parse_noise(model, eps, mu, seed), steps, record_every,
                     snapshot_times, track_fidelity=model != "ideal")
    wt = window_average(rec.times[1:], window)
    wx = window_average(rec.ipr[1:], window)
    trend = linear_trend(wt, wx) if len(wt) >= 3 else None
    return rec, wt, wx, trend


def probability_run(nq, k, t, model="ideal", eps=0.0, mu=0.0, seed=0, T=1.4, gate_level=None):
    """System probabilities ``|psi_n|^2`` after ``t`` iterations (array index order)."""
    _guard(nq, MAX_EVOLVE_QUBITS, "evolve")
    p = MapParams(nq, T, k)
    init = initial_state(p)
    if model == "ideal" and not gate_level:
        rec = evolve_exact(init, p, t, record_every=t, snapshot_times=(t,))
    else:
        rec = evolve(init, p, parse_noise(model, eps, mu, seed), t, record_every=t,
                     snapshot_times=(t,), track_fidelity=False)
    return rec.snapshots[t]


def decay_run(nq, k, T=1.4):
    _guard(nq, MAX_UNITARY_QUBITS, "matrix-elements")
    U = build_full_unitary(MapParams(nq, T, k))
    return matrix_element_decay(U, k)


def spectrum_run(nq, k, T=1.4):
    _guard(nq, MAX_EIG_QUBITS, "spectrum")
    U = build_full_unitary(MapParams(nq, T, k))
    spec = quasi_energy_spectrum(U)
    return spec, level_spacing_stats(spec)


def coarse_grain(a, size: int = 256) -> np.ndarray:
    """Block-average a square array down to at most ``size x size``."""
    n = a.shape[0]
    b = max(1, n // size)
    m = n // b
    return a[: m * b, : m * b].reshape(m, b, m, b).mean(axis=(1, 3))


def tail_window(nq: int):
    """Momentum window used for the algebraic tail fit."""
    N = 1 << nq
    return max(2, N // 32), N // 2


def tail_run(nq, k=1.0, t=1000, T=1.4):
    probs = probability_run(nq, k, t, T=T)
    lo, hi = tail_window(nq)
    return probs, tail_fit(probs, lo, hi)
