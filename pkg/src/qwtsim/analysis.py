"""Observables and statistics for map evolutions and map unitaries."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

__all__ = [
    "EvolutionRecord",
    "fidelity",
    "find_tf",
    "ipr",
    "window_average",
    "build_full_unitary",
    "PowerLawFit",
    "fit_power_law",
    "DecayResult",
    "matrix_element_decay",
    "SpectralResult",
    "SpacingStats",
    "quasi_energy_spectrum",
    "level_spacing_stats",
    "NoisyLaw",
    "StaticLaw",
    "ScalingPoint",
    "ScalingFit",
    "fit_scaling",
    "DecayShape",
    "fidelity_decay_shape",
    "ThresholdResult",
    "threshold_epsilon_s",
    "TwoRegimeFit",
    "two_regime_fit",
    "TrendTest",
    "linear_trend",
    "momentum_profile",
    "tail_fit",
    "local_maxima",
    "MAX_UNITARY_QUBITS",
    "MAX_EIG_QUBITS",
]

MAX_UNITARY_QUBITS = 13
MAX_EIG_QUBITS = 11


@dataclass
class EvolutionRecord:
    times: np.ndarray
    fidelity: np.ndarray
    ipr: np.ndarray
    snapshots: dict = field(default_factory=dict)
    n_gates: int = 0
    kicks: int = 0

    def windowed(self, dt: int = 50):
        """Block means of ``(times, ipr)`` over windows of ``dt`` records (the t=0 entry excluded)."""
        return window_average(self.times[1:], dt), window_average(self.ipr[1:], dt)

    def tf(self, threshold: float = 0.9) -> float:
        return find_tf(self.fidelity, threshold, self.times)


# --------------------------------------------------------------------------
# basic observables


def fidelity(psi_ideal, psi_eps) -> float:
    a, b = np.asarray(psi_ideal), np.asarray(psi_eps)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(abs(np.vdot(a, b)) ** 2)


def find_tf(f, threshold: float = 0.9, times=None) -> float:
    """First downward crossing of ``threshold``, linearly interpolated; ``inf`` if never."""
    f = np.asarray(f, dtype=float)
    t = np.arange(len(f), dtype=float) if times is None else np.asarray(times, dtype=float)
    if f[0] < threshold:
        raise ValueError("fidelity series starts below threshold")
    below = np.nonzero(f < threshold)[0]
    if len(below) == 0:
        return math.inf
    i = int(below[0])
    return float(t[i - 1] + (t[i] - t[i - 1]) * (f[i - 1] - threshold) / (f[i - 1] - f[i]))


def ipr(probs) -> float:
    """``1 / sum p^2`` for a probability vector (use ``|psi|^2``)."""
    p = np.asarray(probs, dtype=float)
    return float(1.0 / np.dot(p, p))


def window_average(series, dt: int = 50) -> np.ndarray:
    """Means over consecutive non-overlapping blocks of ``dt``; a trailing partial block is dropped."""
    if dt < 1:
        raise ValueError("dt must be >= 1")
    s = np.asarray(series, dtype=float)
    nb = len(s) // dt
    return s[: nb * dt].reshape(nb, dt).mean(axis=1)


def build_full_unitary(params) -> np.ndarray:
    """Dense ``N x N`` map unitary from the classical oracle (rows/cols by array index)."""
    from .rotor import exact_map_matrix

    if params.nq > MAX_UNITARY_QUBITS:
        raise ValueError(f"N = 2^{params.nq} exceeds the dense-matrix guard 2^{MAX_UNITARY_QUBITS}")
    return exact_map_matrix(params)


# --------------------------------------------------------------------------
# power laws


@dataclass
class PowerLawFit:
    slope: float
    intercept: float
    stderr: float
    window: tuple
    n_points: int
    residuals: np.ndarray

    @property
    def exponent(self) -> float:
        return -self.slope


def fit_power_law(x, y, lo=None, hi=None, min_points: int = 3) -> PowerLawFit:
    """Least squares of ``log y`` on ``log x`` for ``lo <= x <= hi`` and ``y > 0``."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    lo = x.min() if lo is None else lo
    hi = x.max() if hi is None else hi
    sel = (x >= lo) & (x <= hi) & (y > 0) & (x > 0)
    n = int(sel.sum())
    if n < min_points:
        raise ValueError(f"window [{lo}, {hi}] has {n} usable points, need {min_points}")
    lx, ly = np.log(x[sel]), np.log(y[sel])
    r = stats.linregress(lx, ly)
    res = ly - (r.intercept + r.slope * lx)
    return PowerLawFit(float(r.slope), float(r.intercept), float(r.stderr), (lo, hi), n, res)


@dataclass
class DecayResult:
    d: np.ndarray
    mean_sq: np.ndarray
    asymptotic: PowerLawFit | None
    intermediate: PowerLawFit | None
    notes: list


def matrix_element_decay(U, k: float | None = None) -> DecayResult:
    """Diagonal-band averages ``<|U_{n,n'}|^2>`` at offset ``d = |n - n'|`` and power-law fits.

    Asymptotic window ``[max(10, 10k), N/4]`` (skipped when it spans less than
    a factor 2); intermediate window ``[2, max(4, k)]`` (only when ``5k >= 10``).
    """
    U = np.asarray(U)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise ValueError("U must be square")
    N = U.shape[0]
    a = np.abs(U) ** 2
    d = np.arange(N)
    mean = np.empty(N)
    mean[0] = np.diagonal(a).mean()
    for off in range(1, N):
        mean[off] = 0.5 * (np.diagonal(a, off).mean() + np.diagonal(a, -off).mean())
    notes = []
    asym = inter = None
    tail = mean[1:]
    if not np.any(tail > 1e-300):
        notes.append("no off-diagonal weight; fits skipped")
        return DecayResult(d, mean, None, None, notes)
    if k is not None:
        lo = max(10.0, 10.0 * k)
        if N / 4 < 2 * lo:
            notes.append(f"asymptotic: window [{lo:g}, {N / 4:g}] spans less than a factor 2")
        else:
            try:
                asym = fit_power_law(d, mean, lo, N / 4)
            except ValueError as e:
                notes.append(f"asymptotic: {e}")
        if 5 * k >= 10:
            try:
                inter = fit_power_law(d, mean, 2, max(4.0, k))
            except ValueError as e:
                notes.append(f"intermediate: {e}")
        else:
            notes.append("intermediate: 5k < 10, window empty")
    return DecayResult(d, mean, asym, inter, notes)


# --------------------------------------------------------------------------
# spectra


@dataclass
class SpectralResult:
    omega: np.ndarray
    spacings: np.ndarray
    edges: np.ndarray
    mass: np.ndarray
    bin_width: float

    @property
    def density(self) -> np.ndarray:
        return self.mass / self.bin_width

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[1:] + self.edges[:-1])


@dataclass
class SpacingStats:
    fraction_below: float
    poisson_fraction: float
    ratio: float
    ks_statistic: float
    ks_pvalue: float
    n: int


def _spacing_histogram(s, bin_width=0.1, smax=5.0):
    edges = np.round(np.arange(0, smax + bin_width / 2, bin_width), 12)
    # rounding keeps exactly rigid spacings (s = 1 up to ulp) in one bin
    counts, _ = np.histogram(np.clip(np.round(s, 10), 0, smax - 1e-12), bins=edges)
    return edges, counts / len(s)


def quasi_energy_spectrum(U, bin_width: float = 0.1, smax: float = 5.0) -> SpectralResult:
    """Eigenphases in ``[0, 2 pi)``, circular spacings in units of ``2 pi / N``, histogram.

    Spacings beyond ``smax`` are counted in the last bin so the mass sums to one.
    """
    U = np.asarray(U)
    N = U.shape[0]
    if N > 1 << MAX_EIG_QUBITS:
        raise ValueError(f"N = {N} exceeds the dense eigensolve guard 2^{MAX_EIG_QUBITS}")
    err = np.abs(U @ U.conj().T - np.eye(N)).max()
    if err > 1e-8:
        raise ValueError(f"matrix is not unitary (max deviation {err:.2e})")
    lam = np.linalg.eigvals(U)
    if np.abs(np.abs(lam) - 1).max() > 1e-8:
        raise ValueError("eigenvalues off the unit circle")
    omega = np.sort(np.mod(np.angle(lam), 2 * np.pi))
    omega[omega >= 2 * np.pi] = 0.0
    omega = np.sort(omega)
    gaps = np.diff(np.append(omega, omega[0] + 2 * np.pi))
    s = gaps * N / (2 * np.pi)
    edges, mass = _spacing_histogram(s, bin_width, smax)
    return SpectralResult(omega, s, edges, mass, bin_width)


def level_spacing_stats(spectrum: SpectralResult, s_small: float = 0.1, min_spacings: int = 200) -> SpacingStats:
    s = spectrum.spacings
    if len(s) < min_spacings:
        raise ValueError(f"need >= {min_spacings} spacings, got {len(s)}")
    frac = float(np.mean(s < s_small))
    pois = 1 - math.exp(-s_small)
    ks = stats.kstest(s, "expon")
    return SpacingStats(frac, pois, frac / pois, float(ks.statistic), float(ks.pvalue), len(s))


# --------------------------------------------------------------------------
# scaling laws


@dataclass(frozen=True)
class ScalingPoint:
    eps: float
    nq: int
    n_g: int
    t_f: float


@dataclass(frozen=True)
class NoisyLaw:
    """``t_f = C / (eps^2 n_g)``."""

    power: int = 2
    name = "noisy"

    def predictor(self, p: ScalingPoint) -> float:
        return 1.0 / (p.eps**2 * p.n_g)


@dataclass(frozen=True)
class StaticLaw:
    """``t_f = D / (eps n_g sqrt(n_q))``."""

    power: int = 1
    name = "static"

    def predictor(self, p: ScalingPoint) -> float:
        return 1.0 / (p.eps * p.n_g * math.sqrt(p.nq))


@dataclass
class ScalingFit:
    law: str
    constant: float
    exponent: float
    exponent_stderr: float
    residuals: np.ndarray
    points: list


def fit_scaling(points, law) -> ScalingFit:
    """One-parameter fit of the law's constant plus a free-exponent diagnostic.

    The constant minimises the squared residuals of ``log t_f - log(K * predictor)``
    (a geometric mean).  The free exponent ``gamma`` comes from regressing
    ``log(t_f / (K * predictor) * eps^-power)`` on ``log eps``, i.e. ``t_f`` with
    the ``n_g`` and ``n_q`` dependence of the law divided out.
    """
    pts = [p if isinstance(p, ScalingPoint) else ScalingPoint(*p) for p in points]
    pts = [p for p in pts if math.isfinite(p.t_f) and p.t_f > 0]
    if len(pts) < 4:
        raise ValueError(f"need >= 4 finite points, got {len(pts)}")
    eps = np.array([p.eps for p in pts])
    if math.log10(eps.max() / eps.min()) < 1 - 1e-12:
        raise ValueError("eps must span at least one decade")
    tf = np.array([p.t_f for p in pts])
    pred = np.array([law.predictor(p) for p in pts])
    logc = np.log(tf / pred)
    const = float(np.exp(logc.mean()))
    res = logc - logc.mean()
    # remove n_g, n_q dependence, keep eps
    reduced = tf / (pred * eps ** law.power)
    r = stats.linregress(np.log(eps), np.log(reduced))
    return ScalingFit(law.name, const, float(-r.slope), float(r.stderr), res, pts)


@dataclass
class DecayShape:
    kind: str
    rate: float
    sse_exponential: float
    sse_gaussian: float


def fidelity_decay_shape(f, times=None, floor: float = 0.05) -> DecayShape:
    """Compare ``ln f = -a t`` against ``ln f = -b t^2`` (both through the origin).

    Uses the samples from the start up to the first one below ``floor``.
    ``rate`` is ``a`` (exponential) or ``b`` (gaussian).
    """
    f = np.asarray(f, dtype=float)
    t = np.arange(len(f), dtype=float) if times is None else np.asarray(times, dtype=float)
    if f.min() >= 0.5:
        raise ValueError("fidelity never drops below 0.5")
    stop = np.nonzero(f < floor)[0]
    end = int(stop[0]) if len(stop) else len(f)
    t, y = t[:end], np.log(np.clip(f[:end], 1e-300, None))
    sel = t > 0
    t, y = t[sel], y[sel]

    def through_origin(x):
        c = -np.dot(x, y) / np.dot(x, x)
        return c, float(np.sum((y + c * x) ** 2))

    a, sse_e = through_origin(t)
    b, sse_g = through_origin(t**2)
    if sse_e <= sse_g:
        return DecayShape("exponential", float(a), sse_e, sse_g)
    return DecayShape("gaussian", float(b), sse_e, sse_g)


@dataclass
class ThresholdResult:
    eps_s: float
    p_r: float
    p_s: float


def threshold_epsilon_s(eps_r: float, nq: float, C: float, D: float) -> ThresholdResult:
    """Static accuracy border ``eps_s = D eps_r^2 / (C sqrt(n_q))``."""
    for name, v in (("eps_r", eps_r), ("nq", nq), ("C", C), ("D", D)):
        if not v > 0:
            raise ValueError(f"{name} must be positive")
    eps_s = D * eps_r**2 / (C * math.sqrt(nq))
    return ThresholdResult(eps_s, eps_r**2, eps_s**2)


@dataclass
class TwoRegimeFit:
    """Piecewise-linear fit in log-log with a free break between two data points."""

    slope_low: float
    slope_high: float
    break_x: float
    sse: float
    low: PowerLawFit
    high: PowerLawFit


def two_regime_fit(x, y, min_points: int = 3) -> TwoRegimeFit:
    """Split sorted ``x`` into a low and a high segment, each fitted separately.

    The split minimising the total squared residual in log space wins.
    """
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    order = np.argsort(x)
    x, y = x[order], y[order]
    if len(x) < 2 * min_points:
        raise ValueError(f"need >= {2 * min_points} points")
    best = None
    for i in range(min_points, len(x) - min_points + 1):
        lo = fit_power_law(x[:i], y[:i], min_points=min_points)
        hi = fit_power_law(x[i:], y[i:], min_points=min_points)
        sse = float(np.sum(lo.residuals**2) + np.sum(hi.residuals**2))
        if best is None or sse < best.sse:
            best = TwoRegimeFit(lo.slope, hi.slope, math.sqrt(x[i - 1] * x[i]), sse, lo, hi)
    return best


@dataclass
class TrendTest:
    """Least-squares trend with serial-correlation-adjusted significance.

    ``stderr`` and ``pvalue`` use the effective sample size
    ``n_eff = n (1 - r1) / (1 + r1)`` from the lag-1 autocorrelation ``r1`` of
    the residuals; ``naive_pvalue`` is the plain OLS value.
    """

    slope: float
    stderr: float
    pvalue: float
    mean: float
    naive_pvalue: float = float("nan")
    n_eff: float = float("nan")

    def flat(self, alpha: float = 0.05) -> bool:
        return self.pvalue > alpha

    @property
    def ci95(self) -> tuple:
        dof = max(self.n_eff - 2, 1)
        h = stats.t.ppf(0.975, dof) * self.stderr
        return self.slope - h, self.slope + h


def linear_trend(t, y) -> TrendTest:
    t, y = np.asarray(t, dtype=float), np.asarray(y, dtype=float)
    n = len(t)
    r = stats.linregress(t, y)
    res = y - (r.intercept + r.slope * t)
    r1 = float(np.dot(res[1:], res[:-1]) / np.dot(res, res)) if np.dot(res, res) > 0 else 0.0
    r1 = max(r1, 0.0)
    n_eff = min(n * (1 - r1) / (1 + r1), n)
    dof = n_eff - 2
    if dof <= 0:
        return TrendTest(float(r.slope), math.inf, 1.0, float(y.mean()), float(r.pvalue), n_eff)
    se = r.stderr * math.sqrt((n - 2) / dof)
    p = 2 * stats.t.sf(abs(r.slope) / se, dof) if se > 0 else (0.0 if r.slope else 1.0)
    return TrendTest(float(r.slope), float(se), float(p), float(y.mean()), float(r.pvalue), float(n_eff))


# --------------------------------------------------------------------------
# momentum distributions


def momentum_profile(probs) -> tuple[np.ndarray, np.ndarray]:
    """Average ``|psi_n|^2`` over ``+n`` and ``-n``; returns ``(|n|, w)`` for ``|n| = 0..N/2``.

    ``probs`` is indexed by array index ``n + N/2``.
    """
    p = np.asarray(probs, dtype=float)
    N = len(p)
    h = N // 2
    n = np.arange(h + 1)
    w = np.empty(h + 1)
    w[0] = p[h]
    w[1:h] = 0.5 * (p[h + 1: N] + p[h - 1: 0: -1])[: h - 1]
    w[h] = p[0]
    return n, w


def tail_fit(probs, lo: float, hi: float) -> PowerLawFit:
    """Power-law fit of the symmetrised momentum profile over ``lo <= |n| <= hi``."""
    n, w = momentum_profile(probs)
    return fit_power_law(n, w, lo, hi)


def local_maxima(y, order: int = 3) -> np.ndarray:
    """Indices that are the largest within ``order`` neighbours on either side."""
    from scipy.signal import argrelextrema

    return argrelextrema(np.asarray(y, dtype=float), np.greater_equal, order=order)[0]
