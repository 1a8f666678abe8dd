"""Gate imperfection models.

* ``NoisyGates``: every gate application has its eigenphases jittered by fresh
  uniform angles in ``[-eps/2, eps/2]``.
* ``Static``: gates are perfect; after every gate the register picks up
  ``exp(i sum_l eta_l Z_l) prod_l exp(i mu_l X_l X_{l+1})`` with disorder fixed
  for the whole run on a circular chain that includes the ancilla.
* ``PseudoStatic``: one noisy-gates realisation of the circuit, drawn once and
  reused on every iteration.

Random streams are keyed by ``(seed, model, step)``; within a step the gate
index selects the row of the draw, so realisations never depend on evaluation
order.

Perturbation convention: non-diagonal gates (including the X block of CNOT and
Toffoli) are diagonalised and each of the two eigenvalues gets its own random
phase.  Diagonal phase gates (``PHASE``, ``CPHASE``) have their phase angle
shifted by one random angle.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.linalg import schur

from . import _kernels
from .gates import SWAP, Circuit, Gate
from .statevector import StateVector

__all__ = [
    "Ideal",
    "NoisyGates",
    "Static",
    "PseudoStatic",
    "NoiseModel",
    "StaticDisorder",
    "perturb_gate",
    "sample_static_disorder",
    "apply_static_kick",
    "apply_noise_after_gate",
    "pseudo_static_sequence",
    "CircuitRunner",
    "parse_noise",
]

_KEY_NOISY, _KEY_STATIC, _KEY_PSEUDO = 1, 2, 3


def _check_nonneg(**kw):
    for k, v in kw.items():
        if not v >= 0:
            raise ValueError(f"{k} must be >= 0, got {v}")


@dataclass(frozen=True)
class Ideal:
    name = "ideal"


@dataclass(frozen=True)
class NoisyGates:
    eps: float
    seed: int = 0
    name = "noisy"

    def __post_init__(self):
        _check_nonneg(eps=self.eps)


@dataclass(frozen=True)
class Static:
    eps: float
    mu: float = 0.0
    seed: int = 0
    name = "static"

    def __post_init__(self):
        _check_nonneg(eps=self.eps, mu=self.mu)


@dataclass(frozen=True)
class PseudoStatic:
    eps: float
    seed: int = 0
    name = "pseudo-static"

    def __post_init__(self):
        _check_nonneg(eps=self.eps)


NoiseModel = Ideal | NoisyGates | Static | PseudoStatic


def parse_noise(kind: str, eps: float = 0.0, mu: float = 0.0, seed: int = 0) -> NoiseModel:
    kind = kind.lower().replace("_", "-")
    if kind == "ideal":
        return Ideal()
    if kind in ("noisy", "noisy-gates"):
        return NoisyGates(eps, seed)
    if kind == "static":
        return Static(eps, mu, seed)
    if kind in ("pseudo-static", "pseudostatic", "pseudo"):
        return PseudoStatic(eps, seed)
    raise ValueError(f"unknown noise model {kind!r}")


# --------------------------------------------------------------------------
# per-gate perturbation


def _eigen_data(g: Gate):
    """``(W, lam, mask)`` with ``g.matrix = W diag(lam) W^dagger``; mask selects jittered phases."""
    m = g.matrix
    if g.kind == SWAP or not g.is_diagonal:
        t, w = schur(m, output="complex")
        lam = np.diag(t).copy()
        return w, lam, np.ones(len(lam))
    return np.eye(2, dtype=np.complex128), np.diag(m).copy(), np.array([0.0, 1.0])


def _rebuild(w, lam, eta, mask):
    return (w * (lam * np.exp(1j * eta * mask))) @ w.conj().T


def _polish(m: np.ndarray) -> np.ndarray:
    """One Newton step towards the nearest unitary; removes the bias of the rebuild."""
    mh = np.conj(np.swapaxes(m, -1, -2))
    eye = np.eye(m.shape[-1])
    return 0.5 * m @ (3 * eye - mh @ m)


def perturb_gate(g: Gate, eps: float, rng: np.random.Generator) -> Gate:
    """Return ``g`` with its eigenphases jittered uniformly in ``[-eps/2, eps/2]``."""
    _check_nonneg(eps=eps)
    dim = 4 if g.kind == SWAP else 2
    eta = rng.uniform(-eps / 2, eps / 2, size=dim)
    if eps == 0:
        return g
    w, lam, mask = _eigen_data(g)
    new = _polish(_rebuild(w, lam, eta, mask))
    if g.kind != SWAP and g.is_diagonal and g.angle is not None:
        return g.with_matrix(new, angle=g.angle + eta[1])
    return g.with_matrix(new)


# --------------------------------------------------------------------------
# static disorder


@dataclass(frozen=True, eq=False)
class StaticDisorder:
    """Detunings ``eta`` per qubit and couplings ``mu`` per link ``(l, l+1 mod n)``."""

    eta: np.ndarray
    mu: np.ndarray

    @property
    def n_qubits(self) -> int:
        return len(self.eta)

    @cached_property
    def kick_arrays(self):
        n = self.n_qubits
        dim = 1 << n
        idx = np.arange(dim)
        total = np.zeros(dim)
        for l in range(n):
            z = 1 - 2 * ((idx >> (n - 1 - l)) & 1)
            total += self.eta[l] * z
        zphase = np.exp(1j * total)
        keep = self.mu != 0
        links = np.arange(n)[keep]
        masks = np.array([(1 << (n - 1 - l)) | (1 << (n - 1 - (l + 1) % n)) for l in links],
                         dtype=np.int64)
        mu = self.mu[keep]
        return zphase, masks, np.cos(mu).astype(np.complex128), 1j * np.sin(mu)


def sample_static_disorder(n_qubits: int, eps: float, mu: float, seed: int) -> StaticDisorder:
    _check_nonneg(eps=eps, mu=mu)
    rng = np.random.default_rng([seed, _KEY_STATIC])
    eta = rng.uniform(-eps / 2, eps / 2, size=n_qubits)
    mus = rng.uniform(-mu / 2, mu / 2, size=n_qubits)
    return StaticDisorder(eta, mus)


def apply_static_kick(state: StateVector, d: StaticDisorder) -> StateVector:
    if state.num_qubits != d.n_qubits:
        raise ValueError(f"state has {state.num_qubits} qubits, disorder has {d.n_qubits}")
    _kernels._static_kick(state.amplitudes, *d.kick_arrays)
    return state


def apply_noise_after_gate(state: StateVector, model: NoiseModel, gate_index: int = 0,
                           time_step: int = 0, disorder: StaticDisorder | None = None) -> StateVector:
    """Inter-gate hook: only the static model acts between gates.

    Noisy and pseudo-static errors live in the gate matrices themselves
    (``CircuitRunner.matrices``), so they are no-ops here.
    """
    if isinstance(model, Static):
        if disorder is None:
            disorder = sample_static_disorder(state.num_qubits, model.eps, model.mu, model.seed)
        apply_static_kick(state, disorder)
    return state


def pseudo_static_sequence(circuit: Circuit, eps: float, seed: int) -> Circuit:
    """One perturbed copy of ``circuit``, to be reused on every iteration.

    Uses the same draws as ``CircuitRunner`` with ``PseudoStatic(eps, seed)``.
    """
    _check_nonneg(eps=eps)
    if eps == 0:
        return circuit
    m2, m4 = CircuitRunner(circuit, PseudoStatic(eps, seed)).matrices(1)
    gates = []
    for i, g in enumerate(circuit.gates):
        if g.kind == SWAP:
            gates.append(g.with_matrix(m4[circuit.compiled.aux[i]]))
        elif g.is_diagonal and g.angle is not None:
            shift = float(np.angle(m2[i][1, 1] / g.matrix[1, 1]))
            gates.append(g.with_matrix(m2[i], angle=g.angle + shift))
        else:
            gates.append(g.with_matrix(m2[i]))
    return Circuit(circuit.width, gates)


# --------------------------------------------------------------------------
# compiled runner


_EMPTY_C = np.zeros(0, dtype=np.complex128)
_EMPTY_I = np.zeros(0, dtype=np.int64)


@dataclass(eq=False)
class CircuitRunner:
    """Applies one iteration of ``circuit`` under ``model`` to raw amplitude arrays.

    ``draws`` counts random numbers consumed so far.
    """

    circuit: Circuit
    model: NoiseModel = field(default_factory=Ideal)
    draws: int = 0
    kicks: int = 0

    def __post_init__(self):
        c = self.circuit.compiled
        self._c = c
        self._disorder = None
        self._fixed = None
        if isinstance(self.model, (NoisyGates, PseudoStatic)):
            self._prepare_eigen()
        if isinstance(self.model, Static):
            self._disorder = sample_static_disorder(
                self.circuit.width, self.model.eps, self.model.mu, self.model.seed)
            self.draws += 2 * self.circuit.width
        if isinstance(self.model, PseudoStatic):
            rng = np.random.default_rng([self.model.seed, _KEY_PSEUDO])
            self._fixed = self._perturbed(rng)

    @property
    def disorder(self) -> StaticDisorder | None:
        return self._disorder

    def _prepare_eigen(self):
        gates = self.circuit.gates
        two = [i for i, g in enumerate(gates) if g.kind != SWAP]
        self._swaps = [i for i, g in enumerate(gates) if g.kind == SWAP]
        w = np.zeros((len(gates), 2, 2), dtype=np.complex128)
        lam = np.zeros((len(gates), 2), dtype=np.complex128)
        mask = np.zeros((len(gates), 2))
        cache = {}
        for i in two:
            g = gates[i]
            key = (g.matrix.tobytes(), g.is_diagonal)
            if key not in cache:
                cache[key] = _eigen_data(g)
            w[i], lam[i], mask[i] = cache[key]
        self._w, self._lam, self._mask = w, lam, mask
        self._swap_eig = [_eigen_data(gates[i]) for i in self._swaps]

    def _perturbed(self, rng):
        eps = self.model.eps
        ng = len(self.circuit)
        eta = rng.uniform(-eps / 2, eps / 2, size=(ng, 2))
        self.draws += eta.size
        phases = self._lam * np.exp(1j * eta * self._mask)
        m2 = _polish(np.einsum("gij,gj,gkj->gik", self._w, phases, self._w.conj()))
        m4 = self._c.m4
        if self._swaps:
            eta4 = rng.uniform(-eps / 2, eps / 2, size=(len(self._swaps), 4))
            self.draws += eta4.size
            m4 = np.array([_polish(_rebuild(w, lam, e, mask))
                           for (w, lam, mask), e in zip(self._swap_eig, eta4)])
        return m2, m4

    def matrices(self, step: int):
        """Gate matrices used on iteration ``step`` (1-based)."""
        if isinstance(self.model, NoisyGates) and self.model.eps > 0:
            rng = np.random.default_rng([self.model.seed, _KEY_NOISY, step])
            return self._perturbed(rng)
        if self._fixed is not None:
            return self._fixed
        return self._c.m2, self._c.m4

    def _kick_args(self):
        if self._disorder is None:
            return False, _EMPTY_C, _EMPTY_I, _EMPTY_C, _EMPTY_C
        return (True,) + self._disorder.kick_arrays

    def step(self, psi: np.ndarray, step: int) -> np.ndarray:
        c = self._c
        m2, m4 = self.matrices(step)
        self.kicks += _kernels.run_circuit(
            psi, c.kind, c.cmask, c.tbit, c.tbit2, m2, m4, c.aux, *self._kick_args())
        return psi

    def step_traced(self, psi_ref: np.ndarray, psi: np.ndarray, step: int) -> np.ndarray:
        """Advance ideal ``psi_ref`` and imperfect ``psi``; fidelity after every gate."""
        c = self._c
        m2, m4 = self.matrices(step)
        return _kernels.run_pair_traced(
            psi_ref, psi, c.kind, c.cmask, c.tbit, c.tbit2, c.m2, m2, c.m4, m4, c.aux,
            *self._kick_args())
