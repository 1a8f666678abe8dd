"""Daubechies D4 wavelet transform: classical reference and quantum circuit.

Kernel factorisation on ``n`` local qubits (rightmost factor acts first)::

    D_{2^n} = (I x C1) P (N x I)(N x I + I) ... (N + I) P (I x C0)

``C0``/``C1`` are the reflections ``[[sin t, cos t], [cos t, -sin t]]`` at
``t0 = pi/3`` and ``t1 = 5 pi/12``; ``P`` is the full bit reversal and the
not-ladder conjugated by ``P`` is a cyclic decrement of the index.

Sign convention.  Multiplying out the factorisation gives the filter
coefficients

    c0 = sin t1 cos t0,  c1 = sin t1 sin t0,  c2 = cos t1 sin t0,
    c3 = -cos t1 cos t0,

which are the standard D4 coefficients ``(1+s3, 3+s3, 3-s3, 1-s3)/(4 sqrt 2)``.
The kernel rows are then ``(c0, -c1, c2, -c3)`` on even rows and
``(-c3, -c2, -c1, -c0)`` on odd rows, with periodic wrap-around.  With
``c3' = |c3|``, the matrices ``[[c2, c3'], [c3', -c2]]`` and
``[[c0, c3'], [c3', -c0]]`` normalised to unit rows are ``C0`` and ``C1``.

The pyramid applies ``D_{2^nq}``, then the shuffle ``Pi_{2^nq}``, then the
same pair on the leading half, and so on, ending with ``D_4`` (no ``Pi_4``).
Direct sums ``A + I`` act on the leading ``2^n`` block, i.e. they are
conditioned on the ``nq - n`` high qubits being zero.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .gates import Circuit, Gate, cnot, lower_multicontrolled, refl, x

__all__ = [
    "WaveletAngles",
    "DaubechiesCoefficients",
    "DEFAULT_ANGLES",
    "daubechies_coefficients",
    "rotation_c0",
    "rotation_c1",
    "build_shuffle",
    "build_bit_reversal",
    "build_kernel",
    "build_qwt",
    "classical_kernel_matrix",
    "classical_dwt_d4",
    "classical_idwt_d4",
    "classical_dwt_matrix",
    "shuffle_index",
    "bit_reverse_index",
]


@dataclass(frozen=True)
class WaveletAngles:
    theta0: float = math.pi / 3
    theta1: float = 5 * math.pi / 12


DEFAULT_ANGLES = WaveletAngles()


@dataclass(frozen=True)
class DaubechiesCoefficients:
    c0: float
    c1: float
    c2: float
    c3: float

    def as_array(self) -> np.ndarray:
        return np.array([self.c0, self.c1, self.c2, self.c3])


@lru_cache(maxsize=8)
def daubechies_coefficients(angles: WaveletAngles = DEFAULT_ANGLES) -> DaubechiesCoefficients:
    """Filter coefficients, rounded so the kernel is orthogonal as exactly as doubles allow.

    Plain rounding leaves ``sum c^2 - 1`` near 1e-17, which shows up as a
    steady norm drift over long classical runs; nudging each coefficient by
    at most two ulps removes it.
    """
    s0, k0 = math.sin(angles.theta0), math.cos(angles.theta0)
    s1, k1 = math.sin(angles.theta1), math.cos(angles.theta1)
    return DaubechiesCoefficients(*_orthonormal_rounding((s1 * k0, s1 * s0, k1 * s0, -k1 * k0)))


def _orthonormal_rounding(c, reach: int = 4) -> tuple:
    """Neighbouring doubles minimising the exact ``|sum c^2 - 1| + |c0 c2 + c1 c3|``.

    All coefficients exceed 2^-4, so they are integer multiples of 2^-56 and
    the search runs in exact integer arithmetic.
    """
    scale = 1 << 56
    opts = []
    for v in c:
        n = int(Fraction(v) * scale)
        ulp = int(Fraction(math.ulp(v)) * scale)
        opts.append([n + d * ulp for d in range(-reach, reach + 1)])
    one = scale * scale
    best = min(itertools.product(*opts),
               key=lambda f: abs(sum(x * x for x in f) - one) + abs(f[0] * f[2] + f[1] * f[3]))
    return tuple(x / scale for x in best)


def _reflection(theta: float) -> np.ndarray:
    s, c = math.sin(theta), math.cos(theta)
    return np.array([[s, c], [c, -s]])


def rotation_c0(angles: WaveletAngles = DEFAULT_ANGLES) -> np.ndarray:
    return _reflection(angles.theta0)


def rotation_c1(angles: WaveletAngles = DEFAULT_ANGLES) -> np.ndarray:
    return _reflection(angles.theta1)


# --------------------------------------------------------------------------
# index permutations


def shuffle_index(j: int, n: int) -> int:
    """``(a_0, ..., a_{n-1}) -> (a_{n-1}, a_0, ..., a_{n-2})`` for ``j < 2^n``."""
    return ((j & 1) << (n - 1)) | (j >> 1)


def bit_reverse_index(j: int, n: int) -> int:
    out = 0
    for _ in range(n):
        out = (out << 1) | (j & 1)
        j >>= 1
    return out


# --------------------------------------------------------------------------
# circuits


def _local_qubits(n: int, width: int, ancilla: int) -> tuple[list, list]:
    """System qubits holding the low ``n`` bits, and the high ones above them."""
    system = [q for q in range(width) if q != ancilla]
    nq = len(system)
    if not 1 <= n <= nq:
        raise ValueError(f"level n={n} out of range for {nq} system qubits")
    return system[nq - n:], system[: nq - n]


def _swap_cnots(a: int, b: int) -> list:
    return [cnot(a, b), cnot(b, a), cnot(a, b)]


def _shuffle_gates(local: list) -> list:
    n = len(local)
    out = []
    for p in range(n - 2, -1, -1):
        out += _swap_cnots(local[p], local[p + 1])
    return out


def _bit_reversal_gates(local: list) -> list:
    n = len(local)
    out = []
    for p in range(n // 2):
        out += _swap_cnots(local[p], local[n - 1 - p])
    return out


def _kernel_gates(local: list, angles: WaveletAngles) -> list:
    n = len(local)
    gates = [refl(local[-1], angles.theta0, label="C0")]
    gates += _bit_reversal_gates(local)
    # (N + I_{2^n-2}) first, up to (N x I_{2^{n-1}}) last: flip a_p when a_0..a_{p-1} are 0
    for p in range(n - 1, -1, -1):
        gates.append(_ladder_gate(local, p))
    gates += _bit_reversal_gates(local)
    gates.append(refl(local[-1], angles.theta1, label="C1"))
    return gates


def _ladder_gate(local: list, p: int) -> "_ZeroControlled":
    return _ZeroControlled(x(local[p]), tuple(local[:p]))


@dataclass(frozen=True)
class _ZeroControlled:
    gate: Gate
    zeros: tuple


def _emit(gates, high: list, ancilla: int, width: int) -> list:
    out = []
    for g in gates:
        if isinstance(g, _ZeroControlled):
            zeros = list(g.zeros) + list(high)
            out.extend(lower_multicontrolled(g.gate, (), ancilla, width, zero_controls=zeros).gates)
        else:
            out.extend(lower_multicontrolled(g, (), ancilla, width, zero_controls=high).gates)
    return out


def build_shuffle(n: int, width: int, ancilla: int) -> Circuit:
    """``Pi_{2^n}`` on the leading block, identity elsewhere."""
    if n < 2:
        raise ValueError("shuffle needs n >= 2")
    local, high = _local_qubits(n, width, ancilla)
    return Circuit(width, _emit(_shuffle_gates(local), high, ancilla, width))


def build_bit_reversal(n: int, width: int, ancilla: int) -> Circuit:
    """``P_{2^n}`` on the leading block, identity elsewhere."""
    if n < 1:
        raise ValueError("bit reversal needs n >= 1")
    local, high = _local_qubits(n, width, ancilla)
    return Circuit(width, _emit(_bit_reversal_gates(local), high, ancilla, width))


def build_kernel(n: int, width: int, ancilla: int, angles: WaveletAngles = DEFAULT_ANGLES) -> Circuit:
    """``D_{2^n}`` on the leading block, identity elsewhere."""
    if n < 2:
        raise ValueError("kernel needs n >= 2")
    local, high = _local_qubits(n, width, ancilla)
    return Circuit(width, _emit(_kernel_gates(local, angles), high, ancilla, width))


def build_qwt(nq: int, width: int | None = None, ancilla: int | None = None,
              angles: WaveletAngles = DEFAULT_ANGLES) -> Circuit:
    """Pyramidal D4 transform on ``nq`` system qubits plus one ancilla."""
    if nq < 2:
        raise ValueError("the wavelet transform needs nq >= 2")
    if width is None:
        width = nq + 1
    if ancilla is None:
        ancilla = width - 1
    gates = []
    for n in range(nq, 1, -1):
        gates += build_kernel(n, width, ancilla, angles).gates
        if n > 2:
            gates += build_shuffle(n, width, ancilla).gates
    return Circuit(width, gates)


# --------------------------------------------------------------------------
# classical reference


def _filters(coef: DaubechiesCoefficients):
    c0, c1, c2, c3 = coef.c0, coef.c1, coef.c2, coef.c3
    return np.array([c0, -c1, c2, -c3]), np.array([-c3, -c2, -c1, -c0])


def classical_kernel_matrix(n: int, coef: DaubechiesCoefficients | None = None) -> np.ndarray:
    if n < 2:
        raise ValueError("kernel needs n >= 2")
    coef = coef or daubechies_coefficients()
    even, odd = _filters(coef)
    m = 1 << n
    k = np.zeros((m, m))
    for i in range(m // 2):
        for t in range(4):
            k[2 * i, (2 * i + t) % m] += even[t]
            k[2 * i + 1, (2 * i + t) % m] += odd[t]
    return k


def _check_length(v) -> int:
    m = len(v)
    if m < 4 or m & (m - 1):
        raise ValueError(f"length must be a power of two >= 4, got {m}")
    return m.bit_length() - 1


def _kernel_apply(v: np.ndarray, even, odd) -> np.ndarray:
    blocks = [np.roll(v, -t, axis=0) for t in range(4)]
    out = np.empty_like(v)
    out[0::2] = sum(even[t] * blocks[t][0::2] for t in range(4))
    out[1::2] = sum(odd[t] * blocks[t][0::2] for t in range(4))
    return out


def _kernel_apply_t(w: np.ndarray, even, odd) -> np.ndarray:
    v = np.zeros_like(w)
    for t in range(4):
        contrib = np.zeros_like(w)
        contrib[0::2] = even[t] * w[0::2] + odd[t] * w[1::2]
        v += np.roll(contrib, t, axis=0)
    return v


def classical_dwt_d4(v, coef: DaubechiesCoefficients | None = None) -> np.ndarray:
    """Pyramidal D4 transform with periodic boundary, in the circuit's ordering.

    A 2-D input is transformed column by column (along axis 0).
    """
    v = np.array(v, dtype=np.result_type(v, float))
    nq = _check_length(v)
    even, odd = _filters(coef or daubechies_coefficients())
    for n in range(nq, 1, -1):
        m = 1 << n
        head = _kernel_apply(v[:m], even, odd)
        if n > 2:
            head = np.concatenate([head[0::2], head[1::2]], axis=0)
        v[:m] = head
    return v


def classical_idwt_d4(w, coef: DaubechiesCoefficients | None = None) -> np.ndarray:
    w = np.array(w, dtype=np.result_type(w, float))
    nq = _check_length(w)
    even, odd = _filters(coef or daubechies_coefficients())
    for n in range(2, nq + 1):
        m = 1 << n
        head = w[:m].copy()
        if n > 2:
            inter = np.empty_like(head)
            inter[0::2] = head[: m // 2]
            inter[1::2] = head[m // 2:]
            head = inter
        w[:m] = _kernel_apply_t(head, even, odd)
    return w


def classical_dwt_matrix(nq: int, coef: DaubechiesCoefficients | None = None) -> np.ndarray:
    return classical_dwt_d4(np.eye(1 << nq), coef)
