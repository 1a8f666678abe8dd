"""Kicked wavelet rotor: one iteration is ``W^dagger U_k W U_T``.

``U_T = exp(-i T n^2 / 2)`` is diagonal in the computational (momentum) basis
with ``n = m - N/2`` for array index ``m``; ``U_k = exp(-i k (x - pi)^2 / 2)``
is diagonal in the wavelet basis with ``x = 2 pi j / N``.  ``W`` is the
pyramidal D4 transform.  The register holds ``nq`` system qubits plus one
ancilla (the last qubit, i.e. the least significant bit of the state index).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .analysis import EvolutionRecord, find_tf, ipr
from .gates import Circuit, count_gates, cphase, phase
from .noise import CircuitRunner, Ideal, NoiseModel
from .qwt import build_qwt, classical_dwt_d4, classical_idwt_d4
from .statevector import StateVector

__all__ = [
    "MapParams",
    "IndexMap",
    "quadratic_phase_circuit",
    "build_ut_circuit",
    "build_uk_circuit",
    "build_qwt_cached",
    "build_map_circuit",
    "ut_diagonal",
    "uk_diagonal",
    "exact_map_apply",
    "exact_map_matrix",
    "initial_state",
    "embed",
    "system_probabilities",
    "evolve",
    "evolve_exact",
    "TimescaleResult",
    "fidelity_timescale",
    "gate_resolved_fidelity",
]

TWO_PI = 2 * math.pi
_TWO_PI_LO = 2.4492935982947064e-16  # 2 pi - TWO_PI
_TWO_PI_LD = 8 * np.arctan(np.longdouble(1))


@dataclass(frozen=True)
class MapParams:
    nq: int
    T: float = 1.4
    k: float = 1.0

    def __post_init__(self):
        if self.nq < 1:
            raise ValueError("nq must be >= 1")

    @property
    def N(self) -> int:
        return 1 << self.nq


@dataclass(frozen=True)
class IndexMap:
    """Array index <-> momentum ``n`` in ``[-N/2, N/2)`` and position ``x = 2 pi j / N``."""

    N: int

    def momentum(self, index):
        return np.asarray(index) - self.N // 2

    def index_of_momentum(self, n):
        return np.asarray(n) + self.N // 2

    def position(self, j):
        return TWO_PI * np.asarray(j) / self.N


def _wrap(angle: float) -> float:
    """Reduce to ``[-pi, pi]`` using the two-part value of 2 pi."""
    r = math.remainder(angle, TWO_PI)
    q = round((angle - r) / TWO_PI)
    return math.remainder(r - q * _TWO_PI_LO, TWO_PI)


def quadratic_phase_circuit(nq: int, coef: float, width: int | None = None, label: str = "") -> Circuit:
    """``exp(-i coef (m - N/2)^2 / 2)`` on qubits ``0..nq-1``, up to a global phase.

    With ``m = sum_p a_p w_p``, ``w_p = 2^(nq-1-p)``::

        (m - N/2)^2 = sum_p a_p (w_p^2 - N w_p) + 2 sum_{p<q} a_p a_q w_p w_q + N^2/4

    Every product ``coef * 2^j`` is exact in floating point, so each angle is
    reduced modulo 2 pi before it is combined.
    """
    width = nq + 1 if width is None else width
    N = 1 << nq
    w = [1 << (nq - 1 - p) for p in range(nq)]
    gates = []
    for p in range(nq):
        ang = _wrap(coef * (0.5 * w[p] * w[p])) - _wrap(coef * (0.5 * N * w[p]))
        gates.append(phase(p, _wrap(-ang), label=label))
    for p in range(nq):
        for q in range(p + 1, nq):
            gates.append(cphase(p, q, _wrap(-coef * w[p] * w[q]), label=label))
    return Circuit(width, gates)


def build_ut_circuit(params: MapParams) -> Circuit:
    return quadratic_phase_circuit(params.nq, params.T, label="UT")


def build_uk_circuit(params: MapParams) -> Circuit:
    return quadratic_phase_circuit(params.nq, params.k * (TWO_PI / params.N) ** 2, label="Uk")


@lru_cache(maxsize=16)
def build_qwt_cached(nq: int) -> Circuit:
    return build_qwt(nq)


@lru_cache(maxsize=32)
def build_map_circuit(params: MapParams) -> Circuit:
    """``U_T``, ``W``, ``U_k``, ``W^dagger`` in time order on ``nq + 1`` qubits."""
    if params.nq < 2:
        raise ValueError("the map needs nq >= 2")
    w = build_qwt_cached(params.nq)
    return build_ut_circuit(params) + w + build_uk_circuit(params) + w.adjoint()


def _phase_diagonal(coef, n) -> np.ndarray:
    # extended precision keeps the reduction accurate for large n^2
    x = np.fmod(np.longdouble(coef) * n.astype(np.longdouble) ** 2 / 2, _TWO_PI_LD)
    return np.exp(-1j * x.astype(float))


def ut_diagonal(params: MapParams) -> np.ndarray:
    return _phase_diagonal(params.T, np.arange(params.N) - params.N // 2)


def uk_diagonal(params: MapParams) -> np.ndarray:
    coef = np.longdouble(params.k) * (_TWO_PI_LD / params.N) ** 2
    return _phase_diagonal(coef, np.arange(params.N) - params.N // 2)


def exact_map_apply(psi: np.ndarray, params: MapParams) -> np.ndarray:
    """One map iteration without gates; ``psi`` is ``(N,)`` or ``(N, K)``."""
    psi = np.asarray(psi)
    if psi.shape[0] != params.N:
        raise ValueError(f"expected leading dimension {params.N}, got {psi.shape[0]}")
    ut, uk = ut_diagonal(params), uk_diagonal(params)
    if psi.ndim == 2:
        ut, uk = ut[:, None], uk[:, None]
    if params.k == 0:
        # U_k = 1, so the transform pair cancels exactly
        return ut * psi
    v = classical_dwt_d4(ut * psi)
    return classical_idwt_d4(uk * v)


def exact_map_matrix(params: MapParams, chunk: int = 512) -> np.ndarray:
    N = params.N
    out = np.empty((N, N), dtype=np.complex128)
    for s in range(0, N, chunk):
        cols = np.zeros((N, min(chunk, N - s)), dtype=np.complex128)
        cols[np.arange(s, s + cols.shape[1]), np.arange(cols.shape[1])] = 1
        out[:, s:s + cols.shape[1]] = exact_map_apply(cols, params)
    return out


def initial_state(params: MapParams, momentum: int = 0, ancilla: bool = True) -> StateVector:
    """Basis state at momentum ``n`` (array index ``n + N/2``), ancilla in |0>."""
    N = params.N
    idx = int(IndexMap(N).index_of_momentum(momentum))
    if ancilla:
        amps = np.zeros(2 * N, dtype=np.complex128)
        amps[2 * idx] = 1
        return StateVector(amps, params.nq + 1)
    amps = np.zeros(N, dtype=np.complex128)
    amps[idx] = 1
    return StateVector(amps, params.nq)


def embed(system: np.ndarray) -> np.ndarray:
    """System amplitudes -> register amplitudes with the ancilla in |0>."""
    out = np.zeros(2 * len(system), dtype=np.complex128)
    out[0::2] = system
    return out


def system_probabilities(register: np.ndarray) -> np.ndarray:
    """Marginal ``|psi_n|^2`` over the ancilla."""
    p = register.real**2 + register.imag**2
    return p[0::2] + p[1::2]


def _fid(a: np.ndarray, b: np.ndarray) -> float:
    return abs(np.vdot(a, b)) ** 2


def evolve(initial: StateVector, params: MapParams, noise: NoiseModel | None = None,
           steps: int = 1, record_every: int = 1, snapshot_times=(),
           track_fidelity: bool = True) -> EvolutionRecord:
    """Iterate the gate-level map under ``noise``.

    Fidelity is measured against the ideal trajectory from ``exact_map_apply``.
    ``initial`` may be a register state (``nq + 1`` qubits) or a system state.
    """
    noise = Ideal() if noise is None else noise
    if steps < 1:
        raise ValueError("steps must be >= 1")
    amps = initial.amplitudes
    if initial.num_qubits == params.nq:
        amps = embed(amps)
    elif initial.num_qubits != params.nq + 1:
        raise ValueError(f"initial state must have {params.nq} or {params.nq + 1} qubits")
    if abs(np.vdot(amps, amps).real - 1) > 1e-10:
        raise ValueError("initial state is not normalised")
    psi = amps.astype(np.complex128, copy=True)
    ideal = psi[0::2].copy()
    runner = CircuitRunner(build_map_circuit(params), noise)
    snaps = set(int(t) for t in snapshot_times)

    times, fids, iprs, snapshots = [0], [1.0], [ipr(system_probabilities(psi))], {}
    if 0 in snaps:
        snapshots[0] = system_probabilities(psi)
    for t in range(1, steps + 1):
        runner.step(psi, t)
        if track_fidelity:
            ideal = exact_map_apply(ideal, params)
        if t % record_every == 0 or t == steps:
            times.append(t)
            iprs.append(ipr(system_probabilities(psi)))
            fids.append(_fid(embed(ideal), psi) if track_fidelity else np.nan)
        if t in snaps:
            snapshots[t] = system_probabilities(psi)
    return EvolutionRecord(np.array(times), np.array(fids), np.array(iprs), snapshots,
                           n_gates=len(runner.circuit), kicks=runner.kicks)


def evolve_exact(initial: StateVector, params: MapParams, steps: int, record_every: int = 1,
                 snapshot_times=()) -> EvolutionRecord:
    """Ideal evolution through the classical oracle (no gates)."""
    amps = initial.amplitudes
    if initial.num_qubits == params.nq + 1:
        amps = amps[0::2]
    psi = amps.astype(np.complex128, copy=True)
    snaps = set(int(t) for t in snapshot_times)
    times, iprs, snapshots = [0], [ipr(np.abs(psi) ** 2)], {}
    for t in range(1, steps + 1):
        psi = exact_map_apply(psi, params)
        if t % record_every == 0 or t == steps:
            times.append(t)
            iprs.append(ipr(np.abs(psi) ** 2))
        if t in snaps:
            snapshots[t] = np.abs(psi) ** 2
    return EvolutionRecord(np.array(times), np.ones(len(times)), np.array(iprs), snapshots)


@dataclass
class TimescaleResult:
    """Fidelity timescale of one run.

    ``t_f`` interpolates the iteration-resolved fidelity series; ``n_total``
    is the gate-resolved count ``N_g`` of elementary gates until the first
    drop below threshold, and ``t_f_gates = n_total / n_g``.
    """

    t_f: float
    n_total: float
    n_g: int
    fidelity: np.ndarray
    crossed: bool

    @property
    def t_f_gates(self) -> float:
        return self.n_total / self.n_g


def _first_crossing(f: np.ndarray, threshold: float, f_before: float) -> float:
    """Fractional index (in gates, 1-based) of the first drop below ``threshold``."""
    below = np.nonzero(f < threshold)[0]
    g = int(below[0])
    prev = f_before if g == 0 else f[g - 1]
    return g + (prev - threshold) / (prev - f[g])


def fidelity_timescale(params: MapParams, noise: NoiseModel, max_steps: int,
                       threshold: float = 0.9, initial: StateVector | None = None) -> TimescaleResult:
    """Run until the fidelity first drops below ``threshold`` and resolve the crossing by gate.

    The iteration in which the drop happens is replayed gate by gate (same
    random stream) next to an ideal gate-level copy.
    """
    init = initial_state(params) if initial is None else initial
    psi = init.amplitudes.astype(np.complex128, copy=True)
    if init.num_qubits == params.nq:
        psi = embed(psi)
    ideal = psi[0::2].copy()
    runner = CircuitRunner(build_map_circuit(params), noise)
    ng = len(runner.circuit)
    fids = [1.0]
    for t in range(1, max_steps + 1):
        prev_psi, prev_ideal = psi.copy(), ideal.copy()
        runner.step(psi, t)
        ideal = exact_map_apply(ideal, params)
        f = _fid(embed(ideal), psi)
        fids.append(f)
        if f < threshold:
            ref = embed(prev_ideal)
            trace = runner.step_traced(ref, prev_psi, t)
            g = _first_crossing(trace, threshold, fids[-2]) if (trace < threshold).any() else ng
            fids = np.array(fids)
            return TimescaleResult(find_tf(fids, threshold), (t - 1) * ng + g, ng, fids, True)
    fids = np.array(fids)
    return TimescaleResult(math.inf, math.inf, ng, fids, False)


def gate_resolved_fidelity(params: MapParams, noise: NoiseModel, steps: int,
                           initial: StateVector | None = None):
    """Fidelity after every elementary gate, ``(t, f)`` with ``t`` in map iterations.

    Needed when the drop happens within a few iterations, where a
    per-iteration series has too few points to show its shape.
    """
    init = initial_state(params) if initial is None else initial
    psi = init.amplitudes.astype(np.complex128, copy=True)
    if init.num_qubits == params.nq:
        psi = embed(psi)
    ref = psi.copy()
    runner = CircuitRunner(build_map_circuit(params), noise)
    ng = len(runner.circuit)
    f = [np.ones(1)]
    for t in range(1, steps + 1):
        f.append(runner.step_traced(ref, psi, t))
    f = np.concatenate(f)
    return np.arange(len(f)) / ng, f
