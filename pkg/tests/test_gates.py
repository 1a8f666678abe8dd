import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qwtsim.gates import (
    CNOT,
    CPHASE,
    ONE,
    SWAP,
    TOFFOLI,
    Circuit,
    adjoint,
    circuit_to_matrix,
    cnot,
    count_gates,
    cphase,
    format_circuit,
    lower_multicontrolled,
    one_qubit,
    parse_circuit,
    phase,
    refl,
    ry,
    swap,
    toffoli,
    x,
)


def mc_matrix(width, controls, target, u, zero_controls=()):
    """Brute-force oracle: apply ``u`` on ``target`` when every control matches."""
    dim = 1 << width
    m = np.zeros((dim, dim), dtype=complex)
    bit = lambda j, q: (j >> (width - 1 - q)) & 1
    for j in range(dim):
        on = all(bit(j, c) for c in controls) and not any(bit(j, c) for c in zero_controls)
        if not on:
            m[j, j] = 1
            continue
        b = bit(j, target)
        j0 = j & ~(1 << (width - 1 - target))
        j1 = j0 | (1 << (width - 1 - target))
        m[j0, j] += u[0, b]
        m[j1, j] += u[1, b]
    return m


def restrict_clean(m, width, anc):
    """Block of ``m`` with the ancilla in |0> on both sides, plus the leakage norm."""
    idx = [j for j in range(1 << width) if not (j >> (width - 1 - anc)) & 1]
    leak = [j for j in range(1 << width) if (j >> (width - 1 - anc)) & 1]
    return m[np.ix_(idx, idx)], np.abs(m[np.ix_(leak, idx)]).max()


def random_unitary(rng):
    z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / abs(np.diag(r)))


def test_gate_validation():
    with pytest.raises(ValueError):
        cnot(1, 1)
    with pytest.raises(ValueError):
        one_qubit(0, [[1, 1], [0, 1]])
    with pytest.raises(ValueError):
        Circuit(2, [x(2)])


def test_lowering_no_controls():
    g = x(1)
    c = lower_multicontrolled(g, [], ancilla=2, width=3)
    assert c.gates == (g,)


def test_lowering_single_control_not():
    c = lower_multicontrolled(x(1), [0], ancilla=2, width=3)
    assert [g.kind for g in c] == [CNOT]


def test_lowering_three_controls_matches_permutation():
    c = lower_multicontrolled(x(3), [0, 1, 2], ancilla=4, width=5)
    m = circuit_to_matrix(c)
    perm = np.zeros((32, 32))
    for j in range(32):
        k = j ^ 0b00010 if (j >> 2) & 0b111 == 0b111 else j
        perm[k, j] = 1
    sub, leak = restrict_clean(m, 5, 4)
    ref, _ = restrict_clean(perm, 5, 4)
    assert np.abs(sub - ref).max() < 1e-12
    assert leak < 1e-12


def test_lowering_rejects_ancilla_collision():
    with pytest.raises(ValueError):
        lower_multicontrolled(x(1), [0], ancilla=0, width=3)
    with pytest.raises(ValueError):
        lower_multicontrolled(x(1), [0], ancilla=1, width=3)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6), width=st.integers(3, 7), data=st.data())
def test_lowering_correct_for_random_unitaries(seed, width, data):
    rng = np.random.default_rng(seed)
    anc = width - 1
    target = data.draw(st.integers(0, width - 2))
    others = [q for q in range(width - 1) if q != target]
    nctl = data.draw(st.integers(0, len(others)))
    ctl = list(rng.permutation(others)[:nctl])
    nzero = data.draw(st.integers(0, nctl))
    ones, zeros = ctl[nzero:], ctl[:nzero]
    kind = data.draw(st.sampled_from(["u", "x", "refl", "phase"]))
    g = {
        "u": lambda: one_qubit(target, random_unitary(rng)),
        "x": lambda: x(target),
        "refl": lambda: refl(target, rng.uniform(0, 2 * math.pi)),
        "phase": lambda: phase(target, rng.uniform(-3, 3)),
    }[kind]()
    c = lower_multicontrolled(g, ones, anc, width, zero_controls=zeros)
    sub, leak = restrict_clean(circuit_to_matrix(c), width, anc)
    ref, _ = restrict_clean(mc_matrix(width, ones, target, g.matrix, zeros), width, anc)
    assert np.abs(sub - ref).max() < 1e-10
    assert leak < 1e-10


def test_lowering_cost_is_linear():
    counts = []
    for c in range(1, 12):
        width = c + 2
        circ = lower_multicontrolled(x(c), list(range(c)), ancilla=c + 1, width=width)
        counts.append(count_gates(circ).total)
    assert all(n <= 5 * c + 2 for c, n in zip(range(1, 12), counts))
    # a quadratic term would show up as growing increments
    inc = np.diff(counts)
    assert inc[-4:].max() <= 8


def test_adjoint_examples():
    assert len(adjoint(Circuit(2))) == 0
    a = adjoint(Circuit(2, [cphase(0, 1, 0.4)]))
    assert a.gates[0].kind == CPHASE and a.gates[0].angle == -0.4


def test_adjoint_inverts_random_circuit():
    rng = np.random.default_rng(7)
    width = 6
    gates = []
    for _ in range(60):
        q = [int(v) for v in rng.permutation(width)[:3]]
        gates.append([
            lambda: one_qubit(q[0], random_unitary(rng)),
            lambda: cphase(q[0], q[1], rng.uniform(-3, 3)),
            lambda: cnot(q[0], q[1]),
            lambda: toffoli(q[0], q[1], q[2]),
            lambda: swap(q[0], q[1]),
        ][rng.integers(5)]())
    c = Circuit(width, gates)
    m = circuit_to_matrix(c)
    assert np.abs(circuit_to_matrix(adjoint(c)) - m.conj().T).max() < 1e-12
    psi = rng.normal(size=64) + 1j * rng.normal(size=64)
    psi /= np.linalg.norm(psi)
    out = (c + adjoint(c)).run(psi.copy())
    assert np.abs(out - psi).max() < 1e-11


def test_circuit_to_matrix_examples():
    assert np.array_equal(circuit_to_matrix(Circuit(2)), np.eye(4))
    assert np.array_equal(circuit_to_matrix(Circuit(1, [x(0)])), [[0, 1], [1, 0]])
    with pytest.raises(ValueError):
        circuit_to_matrix(Circuit(15))


def test_count_gates():
    empty = count_gates(Circuit(3))
    assert empty.total == 0 and all(v == 0 for v in empty.counts.values())
    c = Circuit(3, [swap(0, 1), swap(1, 2), cnot(0, 2), x(1), toffoli(0, 1, 2)])
    n = count_gates(c)
    assert (n[SWAP], n[CNOT], n[ONE], n[TOFFOLI]) == (2, 1, 1, 1)
    e = count_gates(c, expand_swaps=True)
    assert e[CNOT] == 7 and e[SWAP] == 0
    assert e.total == sum(e.counts.values())


def test_text_format_round_trip():
    rng = np.random.default_rng(3)
    c = Circuit(4, [
        x(0), phase(1, 0.1), refl(2, math.pi / 3), ry(3, -0.2), cphase(2, 0, math.pi / 4),
        cnot(1, 3), toffoli(0, 1, 2), swap(0, 3), one_qubit(2, random_unitary(rng)),
    ])
    text = format_circuit(c)
    assert text.startswith("width=4\n")
    assert "CPHASE 2 0 0.78539816339744828" in text
    back = parse_circuit(text)
    assert np.array_equal(circuit_to_matrix(back), circuit_to_matrix(c))
    assert format_circuit(back) == text


def test_parse_requires_header():
    with pytest.raises(ValueError):
        parse_circuit("X 0\n")
