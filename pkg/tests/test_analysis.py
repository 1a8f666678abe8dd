import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qwtsim.analysis import (
    NoisyLaw,
    ScalingPoint,
    StaticLaw,
    build_full_unitary,
    find_tf,
    fidelity,
    fidelity_decay_shape,
    fit_power_law,
    fit_scaling,
    ipr,
    level_spacing_stats,
    linear_trend,
    local_maxima,
    matrix_element_decay,
    momentum_profile,
    quasi_energy_spectrum,
    threshold_epsilon_s,
    two_regime_fit,
    window_average,
)
from qwtsim.rotor import MapParams


def test_fidelity_examples():
    rng = np.random.default_rng(0)
    psi = rng.normal(size=8) + 1j * rng.normal(size=8)
    psi /= np.linalg.norm(psi)
    assert abs(fidelity(psi, psi) - 1) < 1e-14
    assert fidelity(np.eye(4)[0], np.eye(4)[2]) == 0
    a, b = np.eye(4)[1], np.eye(4)[3]
    assert abs(fidelity(a, (a + b) / math.sqrt(2)) - 0.5) < 1e-15
    with pytest.raises(ValueError):
        fidelity(np.ones(2), np.ones(4))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_fidelity_symmetric_and_bounded(seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=16) + 1j * rng.normal(size=16)
    b = rng.normal(size=16) + 1j * rng.normal(size=16)
    a, b = a / np.linalg.norm(a), b / np.linalg.norm(b)
    assert fidelity(a, b) == pytest.approx(fidelity(b, a), abs=1e-15)
    assert 0 <= fidelity(a, b) <= 1 + 1e-12


def test_find_tf_examples():
    assert find_tf([1.0, 0.95, 0.85]) == pytest.approx(1.5)
    assert find_tf(np.ones(50)) == math.inf
    tau = 40.0
    t = np.arange(200)
    f = np.exp(-((t / tau) ** 2))
    assert abs(find_tf(f) - tau * math.sqrt(math.log(1 / 0.9))) < 1
    assert find_tf([1.0, 0.95, 0.85], times=[0, 10, 20]) == pytest.approx(15)
    with pytest.raises(ValueError):
        find_tf([0.5, 0.4])


def test_ipr_examples():
    assert ipr(np.eye(8)[3]) == 1
    assert ipr(np.full(16, 1 / 16)) == pytest.approx(16)
    assert ipr([0.5, 0, 0.5, 0]) == pytest.approx(2)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_ipr_bounds(seed):
    p = np.random.default_rng(seed).random(32) ** 3
    p /= p.sum()
    assert 1 - 1e-12 <= ipr(p) <= 32 + 1e-9


def test_window_average_examples():
    assert np.allclose(window_average(np.full(100, 3.0), 50), 3.0)
    assert np.allclose(window_average(np.tile([0.0, 2.0], 10), 2), 1.0)
    s = np.arange(100.0)
    assert np.allclose(window_average(s, 50), [24.5, 74.5])
    assert len(window_average(np.arange(120.0), 50)) == 2
    with pytest.raises(ValueError):
        window_average(s, 0)


def test_full_unitary():
    u = build_full_unitary(MapParams(6, k=0.0))
    assert np.abs(np.abs(u) - np.diag(np.abs(np.diag(u)))).max() < 1e-12
    u = build_full_unitary(MapParams(8))
    assert np.abs(u @ u.conj().T - np.eye(256)).max() < 1e-9
    assert np.abs(np.linalg.norm(u, axis=1) - 1).max() < 1e-10
    with pytest.raises(ValueError):
        build_full_unitary(MapParams(14))


def test_power_law_recovery():
    x = np.arange(1, 200.0)
    fit = fit_power_law(x, 3 * x**-2.5, 5, 100)
    assert fit.slope == pytest.approx(-2.5, abs=1e-12)
    assert fit.exponent == pytest.approx(2.5, abs=1e-12)
    with pytest.raises(ValueError):
        fit_power_law(x, x, 1000, 2000)


def test_matrix_element_decay_synthetic():
    N = 128
    n = np.arange(N)
    d = np.abs(n[:, None] - n[None, :]).astype(float)
    a = np.where(d > 0, d, 1.0) ** -4.0
    r = matrix_element_decay(np.sqrt(a), k=1.0)
    assert r.asymptotic.exponent == pytest.approx(4, abs=1e-9)
    assert r.intermediate is None and r.notes
    assert r.mean_sq[5] == pytest.approx(5.0**-4)


def test_matrix_element_decay_diagonal():
    r = matrix_element_decay(np.diag(np.exp(1j * np.arange(64.0))), k=1.0)
    assert np.all(r.mean_sq[1:] == 0)
    assert r.asymptotic is None and r.intermediate is None
    assert r.notes
    with pytest.raises(ValueError):
        matrix_element_decay(np.ones((3, 4)))


def test_spectrum_identity_and_rigid():
    s = quasi_energy_spectrum(np.eye(16))
    assert np.all(s.omega == 0)
    N = 256
    rigid = np.diag(np.exp(2j * np.pi * np.arange(N) / N))
    s = quasi_energy_spectrum(rigid)
    assert np.abs(s.spacings - 1).max() < 1e-9
    assert abs(s.spacings.mean() - 1) < 1e-12
    assert abs(s.mass.sum() - 1) < 1e-12
    one = np.searchsorted(s.edges, 1.0, side="right") - 1
    assert s.mass[one] == 1


def test_spectrum_rejects_non_unitary():
    with pytest.raises(ValueError):
        quasi_energy_spectrum(2 * np.eye(8))
    with pytest.raises(ValueError):
        quasi_energy_spectrum(np.eye(4096))


def test_random_phases_are_poisson():
    rng = np.random.default_rng(3)
    N = 1024
    spec = quasi_energy_spectrum(np.diag(np.exp(2j * np.pi * rng.random(N))))
    st_ = level_spacing_stats(spec)
    assert st_.ks_pvalue > 0.01
    assert abs(spec.spacings.mean() - 1) < 1e-12
    assert abs(spec.mass.sum() - 1) < 1e-12
    lam = np.exp(1j * spec.omega)
    assert np.all((spec.omega >= 0) & (spec.omega < 2 * np.pi))
    assert np.abs(np.sort(np.angle(lam) % (2 * np.pi)) - spec.omega).sum() < 1e-8 * N


def test_spacing_stats_needs_enough():
    spec = quasi_energy_spectrum(np.diag(np.exp(2j * np.pi * np.arange(64) / 64)))
    with pytest.raises(ValueError):
        level_spacing_stats(spec)


def test_fit_scaling_exact_recovery():
    pts = [ScalingPoint(e, nq, ng, 5.0 / (e**2 * ng))
           for e in (1e-4, 3e-4, 1e-3, 3e-3) for nq, ng in ((6, 1710), (8, 5132))]
    fit = fit_scaling(pts, NoisyLaw())
    assert abs(fit.constant - 5) < 1e-10
    assert fit.exponent == pytest.approx(2, abs=1e-10)
    pts = [ScalingPoint(e, nq, ng, 4.5 / (e * ng * math.sqrt(nq)))
           for e in (1e-4, 1e-3, 1e-2, 3e-2) for nq, ng in ((6, 1710), (8, 5132))]
    fit = fit_scaling(pts, StaticLaw())
    assert abs(fit.constant - 4.5) < 1e-10
    assert fit.exponent == pytest.approx(1, abs=1e-10)
    assert np.abs(fit.residuals).max() < 1e-12


def test_fit_scaling_preconditions():
    few = [ScalingPoint(e, 6, 1710, 1.0) for e in (1e-3, 1e-2, 1e-1)]
    with pytest.raises(ValueError):
        fit_scaling(few, NoisyLaw())
    narrow = [ScalingPoint(e, 6, 1710, 1.0) for e in (1e-3, 2e-3, 3e-3, 4e-3)]
    with pytest.raises(ValueError):
        fit_scaling(narrow, NoisyLaw())


def test_decay_shape_synthetic():
    t = np.arange(0, 1000)
    r = fidelity_decay_shape(np.exp(-t / 100), t)
    assert r.kind == "exponential" and r.rate == pytest.approx(0.01, rel=0.01)
    r = fidelity_decay_shape(np.exp(-((t / 100) ** 2)), t)
    assert r.kind == "gaussian" and r.rate == pytest.approx(1e-4, rel=0.01)
    with pytest.raises(ValueError):
        fidelity_decay_shape(np.ones(10))


def test_threshold_examples():
    r = threshold_epsilon_s(1e-2, 10, 5, 4.5)
    assert r.eps_s == pytest.approx(2.846e-5, rel=1e-3)
    assert r.p_s == pytest.approx(8.1e-10, rel=1e-2)
    assert r.p_r == pytest.approx(1e-4)
    assert threshold_epsilon_s(1, 1, 3, 3).eps_s == pytest.approx(1)
    a, b = threshold_epsilon_s(1e-2, 4, 5, 4.5), threshold_epsilon_s(1e-2, 16, 5, 4.5)
    assert b.eps_s == pytest.approx(a.eps_s / 2)
    with pytest.raises(ValueError):
        threshold_epsilon_s(0, 4, 5, 4.5)


def test_two_regime_fit_finds_break():
    x = np.logspace(-4, -1, 16)
    y = np.where(x < 3e-3, 1 / x, 3e-3 / x**2)
    r = two_regime_fit(x, y)
    assert r.slope_low == pytest.approx(-1, abs=1e-9)
    assert r.slope_high == pytest.approx(-2, abs=1e-9)
    assert 1e-3 < r.break_x < 1e-2


def test_linear_trend():
    rng = np.random.default_rng(0)
    t = np.arange(200.0)
    flat = linear_trend(t, 5 + rng.normal(size=200))
    assert flat.flat()
    steep = linear_trend(t, 0.1 * t + rng.normal(size=200))
    assert not steep.flat() and steep.slope == pytest.approx(0.1, abs=0.01)
    lo, hi = steep.ci95
    assert lo < 0.1 < hi
    # strongly correlated noise widens the error bar
    walk = np.cumsum(rng.normal(size=200))
    tr = linear_trend(t, walk)
    assert tr.n_eff < 50 and tr.pvalue >= tr.naive_pvalue


def test_momentum_profile_and_maxima():
    N = 16
    p = np.zeros(N)
    p[N // 2] = 0.5
    p[N // 2 + 3] = 0.1
    p[N // 2 - 3] = 0.3
    p[0] = 0.1
    n, w = momentum_profile(p)
    assert list(n) == list(range(9))
    assert w[0] == 0.5 and w[3] == pytest.approx(0.2) and w[8] == 0.1
    assert 3 in local_maxima(w, order=2)
