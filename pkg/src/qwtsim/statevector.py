"""Dense state vectors and in-place elementary gate application.

Qubit 0 is the most significant bit of the basis index: for ``n`` qubits the
basis state ``|a_0 a_1 ... a_{n-1}>`` sits at index ``sum_p a_p 2^(n-1-p)``.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "StateVector",
    "basis_state",
    "apply_single_qubit",
    "apply_controlled_single",
    "apply_controlled_phase",
    "apply_controlled_not",
    "apply_toffoli",
    "apply_swap",
    "apply_two_qubit",
    "inner_product",
    "probability_distribution",
    "VALIDATE",
]

# Unitarity checks on gate matrices; off on the hot path.
VALIDATE = False


class StateVector:
    """Complex amplitudes over ``2**num_qubits`` basis states."""

    def __init__(self, amplitudes, num_qubits: int | None = None):
        amps = np.ascontiguousarray(amplitudes, dtype=np.complex128)
        if amps.ndim != 1:
            raise ValueError("amplitudes must be one-dimensional")
        if num_qubits is None:
            num_qubits = int(round(np.log2(amps.size)))
        if amps.size != 1 << num_qubits:
            raise ValueError(
                f"expected {1 << num_qubits} amplitudes for {num_qubits} qubits, got {amps.size}"
            )
        self.amplitudes = amps
        self.num_qubits = num_qubits

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def copy(self) -> "StateVector":
        return StateVector(self.amplitudes.copy(), self.num_qubits)

    def norm2(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def __repr__(self):
        return f"StateVector(num_qubits={self.num_qubits})"


def basis_state(num_qubits: int, index: int) -> StateVector:
    amps = np.zeros(1 << num_qubits, dtype=np.complex128)
    amps[index] = 1.0
    return StateVector(amps, num_qubits)


def _check_qubits(state: StateVector, *qubits: int) -> None:
    for q in qubits:
        if not 0 <= q < state.num_qubits:
            raise IndexError(f"qubit {q} out of range for {state.num_qubits} qubits")
    if len(set(qubits)) != len(qubits):
        raise ValueError(f"qubit indices must be distinct, got {qubits}")


def _check_unitary(u: np.ndarray, tol: float = 1e-12) -> None:
    if not np.allclose(u.conj().T @ u, np.eye(u.shape[0]), atol=tol, rtol=0):
        raise ValueError("gate matrix is not unitary")


def _tensor(state: StateVector) -> np.ndarray:
    return state.amplitudes.reshape((2,) * state.num_qubits)


def _index(n: int, fixed: dict[int, int | slice]) -> tuple:
    idx = [slice(None)] * n
    for q, v in fixed.items():
        idx[q] = v
    return tuple(idx)


def apply_controlled_single(state: StateVector, controls, target: int, u) -> StateVector:
    """Apply ``u`` to ``target`` on the subspace where every control bit is 1."""
    controls = tuple(controls)
    _check_qubits(state, *controls, target)
    u = np.asarray(u, dtype=np.complex128)
    if VALIDATE:
        _check_unitary(u)
    t = _tensor(state)
    n = state.num_qubits
    sel = {c: 1 for c in controls}
    i0 = _index(n, {**sel, target: 0})
    i1 = _index(n, {**sel, target: 1})
    a = t[i0].copy()
    b = t[i1]
    t[i0] = u[0, 0] * a + u[0, 1] * b
    t[i1] = u[1, 0] * a + u[1, 1] * b
    return state


def apply_single_qubit(state: StateVector, target: int, u) -> StateVector:
    return apply_controlled_single(state, (), target, u)


def apply_controlled_phase(state: StateVector, control: int, target: int, phi: float) -> StateVector:
    _check_qubits(state, control, target)
    t = _tensor(state)
    t[_index(state.num_qubits, {control: 1, target: 1})] *= np.exp(1j * phi)
    return state


_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)


def apply_controlled_not(state: StateVector, control: int, target: int) -> StateVector:
    return apply_controlled_single(state, (control,), target, _X)


def apply_toffoli(state: StateVector, c1: int, c2: int, target: int) -> StateVector:
    return apply_controlled_single(state, (c1, c2), target, _X)


def apply_two_qubit(state: StateVector, q1: int, q2: int, m) -> StateVector:
    """Apply a 4x4 matrix on ``(q1, q2)``; ``q1`` is the high bit of the local index."""
    _check_qubits(state, q1, q2)
    m = np.asarray(m, dtype=np.complex128)
    if VALIDATE:
        _check_unitary(m)
    t = _tensor(state)
    n = state.num_qubits
    idx = [_index(n, {q1: a, q2: b}) for a in (0, 1) for b in (0, 1)]
    block = np.stack([t[i].copy() for i in idx])
    out = np.tensordot(m, block, axes=(1, 0))
    for k, i in enumerate(idx):
        t[i] = out[k]
    return state


def apply_swap(state: StateVector, q1: int, q2: int) -> StateVector:
    _check_qubits(state, q1, q2)
    t = _tensor(state)
    n = state.num_qubits
    i01 = _index(n, {q1: 0, q2: 1})
    i10 = _index(n, {q1: 1, q2: 0})
    tmp = t[i01].copy()
    t[i01] = t[i10]
    t[i10] = tmp
    return state


def inner_product(a: StateVector, b: StateVector) -> complex:
    """``<a|b>`` with a fixed left-to-right summation order."""
    if a.num_qubits != b.num_qubits:
        raise ValueError(f"dimension mismatch: {a.num_qubits} vs {b.num_qubits} qubits")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def probability_distribution(state: StateVector) -> np.ndarray:
    amps = state.amplitudes
    return amps.real**2 + amps.imag**2
