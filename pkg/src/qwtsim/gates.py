"""Gate and circuit data model.

Multi-controlled operations are lowered to elementary gates (1-qubit gates,
controlled-phase, controlled-not, Toffoli) with the help of one clean
ancilla qubit and whatever idle qubits are available as "dirty" borrowed
workspace.  The cost of an ``l``-controlled gate is linear in ``l``.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from . import _kernels

__all__ = [
    "Gate",
    "Circuit",
    "GateCount",
    "CompiledCircuit",
    "x",
    "phase",
    "refl",
    "ry",
    "one_qubit",
    "cphase",
    "cnot",
    "toffoli",
    "swap",
    "mcx",
    "lower_multicontrolled",
    "adjoint",
    "circuit_to_matrix",
    "count_gates",
    "format_circuit",
    "parse_circuit",
    "MAX_MATRIX_WIDTH",
]

ONE, CPHASE, CNOT, TOFFOLI, SWAP = "ONE", "CPHASE", "CNOT", "TOFFOLI", "SWAP"
KINDS = (ONE, CPHASE, CNOT, TOFFOLI, SWAP)

MAX_MATRIX_WIDTH = 14

_XMAT = np.array([[0, 1], [1, 0]], dtype=np.complex128)
_SWAPMAT = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=np.complex128
)


@dataclass(frozen=True, eq=False)
class Gate:
    """One elementary gate.

    ``qubits`` lists controls first and the target last (for ``SWAP`` the two
    exchanged qubits).  ``matrix`` is the 2x2 block applied to the target when
    every control is 1, or the 4x4 matrix of a ``SWAP``.  ``name`` refines
    one-qubit gates (``X``, ``PHASE``, ``REFL``, ``RY``, ``U``); ``angle`` is
    the nominal parameter of parametrised gates.
    """

    kind: str
    qubits: tuple
    matrix: np.ndarray
    angle: float | None = None
    name: str = ""
    label: str = ""

    @property
    def controls(self) -> tuple:
        return () if self.kind == SWAP else self.qubits[:-1]

    @property
    def target(self) -> int:
        return self.qubits[-1]

    @property
    def is_diagonal(self) -> bool:
        return self.kind != SWAP and self.matrix[0, 1] == 0 and self.matrix[1, 0] == 0

    def with_matrix(self, matrix, angle=None) -> "Gate":
        return Gate(self.kind, self.qubits, np.asarray(matrix, dtype=np.complex128),
                    self.angle if angle is None else angle, self.name, self.label)

    def __repr__(self):
        a = "" if self.angle is None else f", {self.angle:.6g}"
        return f"{self.name or self.kind}({', '.join(map(str, self.qubits))}{a})"


def _gate(kind, qubits, matrix, angle=None, name="", label=""):
    qubits = tuple(int(q) for q in qubits)
    if len(set(qubits)) != len(qubits):
        raise ValueError(f"{kind}: qubit indices must be distinct, got {qubits}")
    if min(qubits) < 0:
        raise ValueError(f"{kind}: negative qubit index in {qubits}")
    return Gate(kind, qubits, np.asarray(matrix, dtype=np.complex128), angle, name, label)


def one_qubit(target: int, u, name: str = "U", angle: float | None = None, label: str = "") -> Gate:
    u = np.asarray(u, dtype=np.complex128)
    if u.shape != (2, 2) or not np.allclose(u.conj().T @ u, np.eye(2), atol=1e-12, rtol=0):
        raise ValueError("one-qubit gate matrix must be a 2x2 unitary")
    return _gate(ONE, (target,), u, angle, name, label)


def x(target: int, label: str = "") -> Gate:
    return _gate(ONE, (target,), _XMAT, None, "X", label)


def phase(target: int, phi: float, label: str = "") -> Gate:
    return _gate(ONE, (target,), np.diag([1.0, np.exp(1j * phi)]), float(phi), "PHASE", label)


def refl(target: int, theta: float, label: str = "") -> Gate:
    """Real reflection ``[[sin t, cos t], [cos t, -sin t]]``."""
    s, c = math.sin(theta), math.cos(theta)
    return _gate(ONE, (target,), [[s, c], [c, -s]], float(theta), "REFL", label)


def ry(target: int, beta: float, label: str = "") -> Gate:
    """``exp(-i beta Y / 2)``."""
    c, s = math.cos(beta / 2), math.sin(beta / 2)
    return _gate(ONE, (target,), [[c, -s], [s, c]], float(beta), "RY", label)


def cphase(control: int, target: int, phi: float, label: str = "") -> Gate:
    return _gate(CPHASE, (control, target), np.diag([1.0, np.exp(1j * phi)]), float(phi), "", label)


def cnot(control: int, target: int, label: str = "") -> Gate:
    return _gate(CNOT, (control, target), _XMAT, None, "", label)


def toffoli(c1: int, c2: int, target: int, label: str = "") -> Gate:
    return _gate(TOFFOLI, (c1, c2, target), _XMAT, None, "", label)


def swap(q1: int, q2: int, label: str = "") -> Gate:
    return _gate(SWAP, (q1, q2), _SWAPMAT, None, "", label)


def _gate_adjoint(g: Gate) -> Gate:
    m = g.matrix.conj().T
    if g.angle is not None and g.name in ("PHASE", "RY") or g.kind == CPHASE:
        return Gate(g.kind, g.qubits, m, -g.angle, g.name, g.label)
    return Gate(g.kind, g.qubits, m, g.angle, g.name, g.label)


@dataclass(frozen=True)
class CompiledCircuit:
    """Flat arrays consumed by the compiled kernels."""

    width: int
    kind: np.ndarray
    cmask: np.ndarray
    tbit: np.ndarray
    tbit2: np.ndarray
    m2: np.ndarray
    m4: np.ndarray
    aux: np.ndarray

    def __len__(self):
        return self.kind.shape[0]


@dataclass(frozen=True, eq=False)
class Circuit:
    """An ordered, immutable sequence of gates on ``width`` qubits."""

    width: int
    gates: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            if max(g.qubits) >= self.width:
                raise ValueError(f"gate {g!r} exceeds circuit width {self.width}")

    def __len__(self):
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    def __add__(self, other: "Circuit") -> "Circuit":
        if other.width != self.width:
            raise ValueError("cannot concatenate circuits of different width")
        return Circuit(self.width, self.gates + other.gates)

    def adjoint(self) -> "Circuit":
        return adjoint(self)

    @cached_property
    def compiled(self) -> CompiledCircuit:
        return compile_gates(self.width, self.gates)

    def run(self, psi: np.ndarray) -> np.ndarray:
        """Apply the circuit in place to a raw amplitude array."""
        c = self.compiled
        _kernels.run_circuit(psi, c.kind, c.cmask, c.tbit, c.tbit2, c.m2, c.m4, c.aux,
                             False, _EMPTY_C, _EMPTY_I, _EMPTY_C, _EMPTY_C)
        return psi


_EMPTY_C = np.zeros(0, dtype=np.complex128)
_EMPTY_I = np.zeros(0, dtype=np.int64)


def bit(width: int, q: int) -> int:
    return 1 << (width - 1 - q)


def compile_gates(width: int, gates: Sequence[Gate], matrices: np.ndarray | None = None) -> CompiledCircuit:
    n = len(gates)
    kind = np.zeros(n, dtype=np.int64)
    cmask = np.zeros(n, dtype=np.int64)
    tbit = np.zeros(n, dtype=np.int64)
    tbit2 = np.zeros(n, dtype=np.int64)
    m2 = np.zeros((n, 2, 2), dtype=np.complex128)
    aux = np.zeros(n, dtype=np.int64)
    m4 = []
    for i, g in enumerate(gates):
        if g.kind == SWAP:
            kind[i] = 1
            tbit[i] = bit(width, g.qubits[0])
            tbit2[i] = bit(width, g.qubits[1])
            aux[i] = len(m4)
            m4.append(g.matrix)
        else:
            for c in g.controls:
                cmask[i] |= bit(width, c)
            tbit[i] = bit(width, g.target)
            m2[i] = g.matrix
    m4 = np.array(m4, dtype=np.complex128).reshape(-1, 4, 4)
    if matrices is not None:
        m2 = matrices
    return CompiledCircuit(width, kind, cmask, tbit, tbit2, m2, m4, aux)


# --------------------------------------------------------------------------
# multi-controlled lowering


def _vchain_dirty(controls, target, dirty) -> list:
    """C^c X from 4(c-2) Toffolis using c-2 borrowed qubits in any state."""
    c = len(controls)
    xs = list(controls)
    a = list(dirty[: c - 2]) + [target]  # a[k] accumulates; a[c-2] is the target
    down = [toffoli(xs[k + 2], a[k], a[k + 1]) for k in range(c - 3, -1, -1)]
    bottom = toffoli(xs[0], xs[1], a[0])
    first = down + [bottom] + down[::-1]
    second = down[1:] + [bottom] + down[1:][::-1]
    return first + second


def _mcx_cost_vchain(c):
    return 4 * (c - 2)


def mcx(controls: Sequence[int], target: int, ancilla: int | None = None,
        dirty: Sequence[int] = ()) -> list:
    """Gate list for a NOT on ``target`` controlled by all ``controls``.

    ``ancilla`` must be a clean |0> qubit (restored on exit); ``dirty``
    qubits are borrowed in arbitrary states and restored.
    """
    controls = list(controls)
    dirty = [q for q in dirty if q not in controls and q != target and q != ancilla]
    c = len(controls)
    if c == 0:
        return [x(target)]
    if c == 1:
        return [cnot(controls[0], target)]
    if c == 2:
        return [toffoli(controls[0], controls[1], target)]
    options = []
    if len(dirty) >= c - 2:
        options.append(_vchain_dirty(controls, target, dirty))
    if ancilla is not None:
        c1 = (c + 1) // 2
        A, B = controls[:c1], controls[c1:]
        compute = mcx(A, ancilla, None, B + [target] + dirty)
        apply = mcx(B + [ancilla], target, None, A + dirty)
        options.append(compute + apply + compute)
    elif dirty and not options:
        # one borrowed qubit: its state is unknown, so both halves run twice
        b, rest = dirty[0], dirty[1:]
        c1 = (c + 1) // 2
        A, B = controls[:c1], controls[c1:]
        compute = mcx(A, b, None, B + [target] + rest)
        apply = mcx(B + [b], target, None, A + rest)
        options.append(apply + compute + apply + compute)
    if not options:
        raise ValueError(
            f"cannot lower a {c}-controlled NOT: need an ancilla or {c - 2} idle qubits"
        )
    return min(options, key=len)


def _reflection_angle(u: np.ndarray) -> float | None:
    """If ``u`` is a real reflection [[s, c], [c, -s]], return ``beta`` with u = RY(beta) X RY(-beta)."""
    if not np.allclose(u.imag, 0, atol=1e-14):
        return None
    s, c = u[0, 0].real, u[0, 1].real
    if not np.allclose(u.real, [[s, c], [c, -s]], atol=1e-14):
        return None
    # RY(b) X RY(-b) = cos b X - sin b Z
    return math.atan2(-s, c)


def lower_multicontrolled(g: Gate, controls: Sequence[int] = (), ancilla: int | None = None,
                          width: int | None = None, zero_controls: Sequence[int] = ()) -> Circuit:
    """Lower ``g`` conditioned on extra ``controls`` (on 1) and ``zero_controls`` (on 0).

    ``ancilla`` is a clean qubit in |0>, returned to |0>.  Every other idle
    qubit of the circuit is used as borrowed workspace.
    """
    controls = [int(c) for c in controls]
    zero_controls = [int(c) for c in zero_controls]
    extra = controls + zero_controls
    touched = set(g.qubits)
    if len(set(extra)) != len(extra) or touched & set(extra):
        raise ValueError("controls must be distinct and disjoint from the gate's qubits")
    if ancilla is not None and (ancilla in touched or ancilla in extra):
        raise ValueError(f"ancilla {ancilla} collides with controls or targets")
    if width is None:
        width = max(list(g.qubits) + extra + ([ancilla] if ancilla is not None else [])) + 1
    busy = touched | set(extra) | ({ancilla} if ancilla is not None else set())
    free = [q for q in range(width) if q not in busy]

    if not extra:
        return Circuit(width, [g])

    flips = [x(q) for q in zero_controls]
    body = _lower(g, list(g.controls) + extra if g.kind != SWAP else extra, ancilla, free)
    return Circuit(width, flips + body + flips)


def _lower(g: Gate, ctrls: list, ancilla, free: list) -> list:
    if g.kind == SWAP:
        a, b = g.qubits
        out = []
        for (cq, tq) in ((a, b), (b, a), (a, b)):
            out += mcx(ctrls + [cq], tq, ancilla, free)
        return out
    t = g.target
    u = g.matrix
    if np.allclose(u, _XMAT, atol=0, rtol=0):
        return mcx(ctrls, t, ancilla, free)
    if len(ctrls) == 0:
        return [Gate(ONE, (t,), u, g.angle, g.name or "U", g.label)]
    beta = _reflection_angle(u)
    if beta is not None:
        return [ry(t, -beta)] + mcx(ctrls, t, ancilla, free) + [ry(t, beta)]
    # general U = W diag(l1, l2) W^dagger
    if g.is_diagonal:
        w = None
        l1, l2 = u[0, 0], u[1, 1]
    else:
        lam, w = np.linalg.eig(u)
        w, _ = np.linalg.qr(w)
        l1, l2 = lam
    p1, p21 = float(np.angle(l1)), float(np.angle(l2 / l1))
    inner = []
    if len(ctrls) == 1:
        c0 = ctrls[0]
        if abs(p1) > 0:
            inner.append(phase(c0, p1))
        inner.append(cphase(c0, t, p21))
    else:
        if ancilla is None:
            raise ValueError("a multi-controlled non-NOT gate needs the ancilla")
        compute = mcx(ctrls, ancilla, None, [t] + free)
        body = ([phase(ancilla, p1)] if abs(p1) > 0 else []) + [cphase(ancilla, t, p21)]
        inner = compute + body + compute
    if w is None:
        return inner
    return [one_qubit(t, w.conj().T)] + inner + [one_qubit(t, w)]


# --------------------------------------------------------------------------


def adjoint(c: Circuit) -> Circuit:
    return Circuit(c.width, [_gate_adjoint(g) for g in reversed(c.gates)])


def circuit_to_matrix(c: Circuit) -> np.ndarray:
    """Dense matrix of ``c``; column ``j`` is ``c`` applied to basis state ``j``."""
    if c.width > MAX_MATRIX_WIDTH:
        raise ValueError(f"width {c.width} exceeds the dense-matrix guard of {MAX_MATRIX_WIDTH}")
    dim = 1 << c.width
    out = np.zeros((dim, dim), dtype=np.complex128)
    psi = np.zeros(dim, dtype=np.complex128)
    for j in range(dim):
        psi[:] = 0
        psi[j] = 1
        c.run(psi)
        out[:, j] = psi
    return out


@dataclass(frozen=True)
class GateCount:
    """Per-kind gate tallies; ``total`` is the grand total ``n_g``."""

    counts: dict
    total: int

    def __getitem__(self, kind):
        return self.counts.get(kind, 0)


def count_gates(c: Circuit | Iterable[Gate], expand_swaps: bool = False) -> GateCount:
    tally = Counter({k: 0 for k in KINDS})
    for g in c:
        if expand_swaps and g.kind == SWAP:
            tally[CNOT] += 3
        else:
            tally[g.kind] += 1
    counts = dict(tally)
    return GateCount(counts, sum(counts.values()))


# --------------------------------------------------------------------------
# text format


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def _fmt_matrix(m) -> str:
    return " ".join(f"{_fmt(z.real)} {_fmt(z.imag)}" for z in np.asarray(m).ravel())


def _nominal(g: Gate) -> bool:
    """True if ``g.matrix`` is what its kind/name/angle imply."""
    if g.kind == SWAP:
        ref = _SWAPMAT
    elif g.kind in (CNOT, TOFFOLI) or g.name == "X":
        ref = _XMAT
    elif g.kind == CPHASE or g.name == "PHASE":
        ref = np.diag([1.0, np.exp(1j * g.angle)])
    elif g.name == "REFL":
        ref = refl(0, g.angle).matrix
    elif g.name == "RY":
        ref = ry(0, g.angle).matrix
    else:
        return False
    return np.array_equal(ref, g.matrix)


def format_circuit(c: Circuit) -> str:
    """One gate per line, ``KIND q... [angle]``, after a ``width=<w>`` header.

    Gates whose matrix differs from the nominal one (for example perturbed
    copies) are written as ``CU``/``SWAPU`` followed by qubits and the
    matrix entries as real/imaginary pairs.
    """
    lines = [f"width={c.width}"]
    for g in c:
        qs = " ".join(map(str, g.qubits))
        if not _nominal(g):
            if g.kind == SWAP:
                lines.append(f"SWAPU {qs} {_fmt_matrix(g.matrix)}")
            elif g.kind == ONE:
                lines.append(f"U {qs} {_fmt_matrix(g.matrix)}")
            else:
                lines.append(f"CU {qs} {_fmt_matrix(g.matrix)}")
            continue
        kind = g.name if g.kind == ONE else g.kind
        if g.angle is not None:
            lines.append(f"{kind} {qs} {_fmt(g.angle)}")
        else:
            lines.append(f"{kind} {qs}")
    return "\n".join(lines) + "\n"


def _parse_matrix(vals, dim):
    v = np.array(vals, dtype=float)
    return (v[0::2] + 1j * v[1::2]).reshape(dim, dim)


def parse_circuit(text: str) -> Circuit:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines or not lines[0].startswith("width="):
        raise ValueError("missing 'width=<w>' header")
    width = int(lines[0].split("=", 1)[1])
    gates = []
    for ln in lines[1:]:
        tok = ln.split()
        k, args = tok[0], tok[1:]
        if k == "X":
            gates.append(x(int(args[0])))
        elif k == "PHASE":
            gates.append(phase(int(args[0]), float(args[1])))
        elif k == "REFL":
            gates.append(refl(int(args[0]), float(args[1])))
        elif k == "RY":
            gates.append(ry(int(args[0]), float(args[1])))
        elif k == "CPHASE":
            gates.append(cphase(int(args[0]), int(args[1]), float(args[2])))
        elif k == "CNOT":
            gates.append(cnot(int(args[0]), int(args[1])))
        elif k == "TOFFOLI":
            gates.append(toffoli(int(args[0]), int(args[1]), int(args[2])))
        elif k == "SWAP":
            gates.append(swap(int(args[0]), int(args[1])))
        elif k == "U":
            gates.append(Gate(ONE, (int(args[0]),), _parse_matrix(args[1:], 2), None, "U"))
        elif k == "SWAPU":
            gates.append(Gate(SWAP, (int(args[0]), int(args[1])), _parse_matrix(args[2:], 4)))
        elif k == "CU":
            nq = len(args) - 8
            qs = tuple(int(a) for a in args[:nq])
            kind = {2: CNOT, 3: TOFFOLI}.get(nq)
            if kind is None:
                raise ValueError(f"CU with {nq - 1} controls is not an elementary gate")
            gates.append(Gate(kind, qs, _parse_matrix(args[nq:], 2)))
        else:
            raise ValueError(f"unknown gate kind {k!r}")
    return Circuit(width, gates)
