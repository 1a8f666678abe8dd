"""Acceptance criteria 1-10 at desk scale.

Each test prints one ``criterion N: PASS|FAIL`` line; the lines are repeated
in the pytest terminal summary.  The scans behind criteria 7-9 take a few
minutes on one core.
"""

import math

import numpy as np
import pytest

from qwtsim.analysis import (
    NoisyLaw,
    StaticLaw,
    fidelity_decay_shape,
    level_spacing_stats,
    quasi_energy_spectrum,
    build_full_unitary,
    threshold_epsilon_s,
    two_regime_fit,
)
from qwtsim.experiments import (
    cubic_fit,
    decay_run,
    gate_count_table,
    ipr_run,
    run_scan_task,
    scan_tasks,
    summarise_scan,
    tail_run,
)
from qwtsim.gates import circuit_to_matrix
from qwtsim.noise import NoisyGates, Static
from qwtsim.qwt import build_qwt, classical_dwt_matrix
from qwtsim.rotor import MapParams, evolve, gate_resolved_fidelity, initial_state

pytestmark = pytest.mark.slow

SCAN_NQ = (6, 8)
SCAN_EPS = tuple(np.logspace(-3.5, -1.5, 5))
SCAN_SEEDS = (0, 1)


def _scan(model, mu="0", nqs=SCAN_NQ, eps=SCAN_EPS, seeds=SCAN_SEEDS):
    return [run_scan_task(t) for t in scan_tasks(nqs, model, eps, seeds, mu=mu)]


@pytest.fixture(scope="module")
def noisy_scan():
    return _scan("noisy")


@pytest.fixture(scope="module")
def static_scans():
    return {"mu=0": _scan("static", "0"), "mu=eps": _scan("static", "eps")}


def _means(results):
    pts, _ = summarise_scan(results, NoisyLaw())
    return {(p.nq, p.eps): p.t_f for p in pts}


def test_c1_qwt_oracle(verdict):
    worst, leak = 0.0, 0.0
    for nq in range(2, 7):
        m = circuit_to_matrix(build_qwt(nq))
        worst = max(worst, np.abs(m[::2, ::2] - classical_dwt_matrix(nq)).max())
        leak = max(leak, np.abs(m[1::2, ::2]).max())
    ok = worst < 1e-9 and leak < 1e-9
    verdict(1, ok, f"max |W - W_classical| = {worst:.1e}, ancilla leakage {leak:.1e} (n_q 2..6)")
    assert ok


def test_c2_gate_count_cubic(verdict):
    rows = gate_count_table(range(6, 13))
    _, resid = cubic_fit([r.nq for r in rows], [r.n_g for r in rows])
    dev = ", ".join(f"{r.nq}:{r.n_g}/{r.paper}" for r in rows)
    ok = resid <= 0.05
    verdict(2, ok, f"cubic max residual {resid:.2%}; n_g ours/paper {dev}")
    assert ok


def test_c3_ideal_localization(verdict):
    parts, ok = [], True
    for k in (1.0, 1000.0):
        rec, wt, wx, trend = ipr_run(10, k, 5000, window=50)
        flat = trend.flat(0.05)
        ok &= flat
        lo, hi = trend.ci95
        parts.append(f"k={k:g}: xi0={trend.mean:.1f}, slope {trend.slope:.2e} "
                     f"[{lo:.1e}, {hi:.1e}], p={trend.pvalue:.2f}")
    verdict(3, ok, "; ".join(parts))
    assert ok


def test_c4_algebraic_tail(verdict):
    _, fit = tail_run(12, 1.0, 10000)
    ok = abs(fit.slope + 4) <= 0.5
    verdict(4, ok, f"n_q=12, t=1e4: slope {fit.slope:.2f} over |n| in {fit.window}")
    _, small = tail_run(10, 1.0, 1000)
    verdict("4 (n_q=10, t=1e3)", "INFO",
            f"slope {small.slope:.2f} over |n| in {small.window} (see notes)")
    assert ok


def test_c5_matrix_element_decay(verdict):
    parts, ok = [], True
    for nq in (10, 11, 12):
        a = decay_run(nq, 1.0).asymptotic
        i = decay_run(nq, 100.0).intermediate
        ok &= abs(a.exponent - 4) <= 0.5 and abs(i.exponent - 2) <= 0.5
        parts.append(f"N=2^{nq}: alpha(k=1)={a.exponent:.2f}, alpha(k=100)={i.exponent:.2f}")
    verdict(5, ok, "; ".join(parts))
    assert ok


def test_c6_spectral_statistics(verdict):
    low = level_spacing_stats(quasi_energy_spectrum(build_full_unitary(MapParams(10, k=0.1))))
    high = level_spacing_stats(quasi_energy_spectrum(build_full_unitary(MapParams(10, k=1000.0))))
    ok = low.ks_pvalue > 0.01 and high.ratio < 0.6
    verdict(6, ok, f"k=0.1 KS p={low.ks_pvalue:.2f}; k=1000 P(s<0.1)/Poisson={high.ratio:.2f}")
    assert ok


def test_c7_noisy_scaling(verdict, noisy_scan):
    _, fit = summarise_scan(noisy_scan, NoisyLaw())
    p = MapParams(8)
    rec = evolve(initial_state(p), p, NoisyGates(5e-3, 0), 1500)
    shape = fidelity_decay_shape(rec.fidelity, rec.times)
    ok = (abs(fit.exponent - 2) <= 0.3 and 2.5 <= fit.constant <= 10
          and shape.kind == "exponential")
    verdict(7, ok, f"gamma={fit.exponent:.2f}+-{fit.exponent_stderr:.2f}, C={fit.constant:.2f}, "
                   f"decay {shape.kind} (n_q 6,8; eps {SCAN_EPS[0]:.1e}..{SCAN_EPS[-1]:.1e})")
    assert ok


def test_c8_static_scaling(verdict, noisy_scan, static_scans):
    targets = {"mu=0": 4.5, "mu=eps": 2.1}
    noisy = _means(noisy_scan)
    parts, ok = [], True
    for label, res in static_scans.items():
        _, fit = summarise_scan(res, StaticLaw())
        D0 = targets[label]
        dominant = all(tf < noisy[key] for key, tf in _means(res).items())
        ok &= abs(fit.exponent - 1) <= 0.3 and D0 / 2 <= fit.constant <= 2 * D0 and dominant
        parts.append(f"{label}: gamma={fit.exponent:.2f}, D={fit.constant:.2f}, "
                     f"static<noisy everywhere={dominant}")
    # the drop happens within about one iteration here, so resolve it by gate
    t, f = gate_resolved_fidelity(MapParams(12), Static(1e-4, 0.0, 0), 2)
    shape = fidelity_decay_shape(f, t)
    ok &= shape.kind == "gaussian"
    parts.append(f"decay {shape.kind} (n_q=12, eps=1e-4, gate-resolved)")
    verdict(8, ok, "; ".join(parts))
    assert ok


def test_c9_pseudo_static_crossover(verdict):
    eps = tuple(np.logspace(-4, math.log10(0.2), 12))
    res = _scan("pseudo-static", nqs=(6,), eps=eps, seeds=range(6))
    ng = {}
    for r in res:
        ng.setdefault(r.task.eps, []).append(r.N_g)
    x = np.array(sorted(ng))
    y = np.array([np.mean(ng[e]) for e in x])
    fit = two_regime_fit(x, y)
    ok = abs(fit.slope_low + 1) <= 0.3 and abs(fit.slope_high + 2) <= 0.3
    verdict(9, ok, f"n_q=6: slope small eps {fit.slope_low:.2f}, large eps {fit.slope_high:.2f}, "
                   f"break near eps={fit.break_x:.1e}")
    assert ok


def test_c10_threshold(verdict):
    r = threshold_epsilon_s(1e-2, 10, 5, 4.5)
    ok = 1e-10 <= r.p_s < 1e-8 and r.p_r == pytest.approx(1e-4)
    verdict(10, ok, f"eps_s={r.eps_s:.3e}, p_s={r.p_s:.2e}, p_r={r.p_r:.0e}")
    assert ok


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-s"]))
