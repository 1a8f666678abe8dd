import math

import numpy as np
import pytest

from qwtsim.gates import circuit_to_matrix
from qwtsim.qwt import (
    DEFAULT_ANGLES,
    WaveletAngles,
    bit_reverse_index,
    build_bit_reversal,
    build_kernel,
    build_qwt,
    build_shuffle,
    classical_dwt_d4,
    classical_dwt_matrix,
    classical_idwt_d4,
    classical_kernel_matrix,
    daubechies_coefficients,
    rotation_c0,
    rotation_c1,
    shuffle_index,
)

S3 = math.sqrt(3)


def system_block(c):
    """Matrix on the system register with the (last) ancilla in |0>, plus leakage."""
    m = circuit_to_matrix(c)
    return m[::2, ::2], np.abs(m[1::2, ::2]).max()


def basis_image(c, j):
    psi = np.zeros(1 << c.width, dtype=complex)
    psi[j] = 1
    return c.run(psi)


def test_default_angles():
    assert DEFAULT_ANGLES.theta0 == math.pi / 3
    assert DEFAULT_ANGLES.theta1 == 5 * math.pi / 12


def test_coefficients_are_d4():
    c = daubechies_coefficients()
    ref = np.array([1 + S3, 3 + S3, 3 - S3, 1 - S3]) / (4 * math.sqrt(2))
    assert np.allclose([c.c0, c.c1, c.c2, c.c3], ref, atol=1e-15)
    v = np.array([c.c0, c.c1, c.c2, c.c3])
    assert abs(v @ v - 1) < 1e-14
    assert abs(c.c0 * c.c2 + c.c1 * c.c3) < 1e-15


def test_rotation_matrices():
    assert np.allclose(rotation_c0(), [[S3 / 2, 0.5], [0.5, -S3 / 2]], atol=1e-15)
    assert np.allclose(rotation_c0(WaveletAngles(math.pi / 2, 0.0)), [[1, 0], [0, -1]], atol=1e-15)
    for r in (rotation_c0(), rotation_c1()):
        assert np.allclose(r @ r.T, np.eye(2), atol=1e-15)
    # the normalised coefficient matrices reproduce C0 and C1
    c = daubechies_coefficients()
    c3 = abs(c.c3)
    for a, r in ((c.c2, rotation_c0()), (c.c0, rotation_c1())):
        m = np.array([[a, c3], [c3, -a]]) / math.hypot(a, c3)
        assert np.allclose(m, r, atol=1e-14)


def test_index_rules():
    assert shuffle_index(1, 3) == 4
    assert shuffle_index(0, 3) == 0
    assert bit_reverse_index(1, 3) == 4
    assert bit_reverse_index(2, 3) == 2


def test_shuffle_circuit_examples():
    c = build_shuffle(3, 4, 3)
    assert np.flatnonzero(basis_image(c, 2 * 1))[0] == 2 * 4
    assert np.flatnonzero(basis_image(c, 0))[0] == 0
    # shuffle on the low 2 of 3 system qubits: 101 has a high bit set, so it is fixed
    c = build_shuffle(2, 4, 3)
    out = basis_image(c, 2 * 5)
    assert out[2 * 5] == 1


def test_bit_reversal_circuit_examples():
    c = build_bit_reversal(3, 4, 3)
    assert basis_image(c, 2 * 1)[2 * 4] == 1
    assert basis_image(c, 2 * 2)[2 * 2] == 1


@pytest.mark.parametrize("n, nq", [(2, 3), (3, 4), (4, 4), (2, 5)])
def test_permutation_stages_exact(n, nq):
    for build, rule in ((build_shuffle, shuffle_index), (build_bit_reversal, bit_reverse_index)):
        c = build(n, nq + 1, nq)
        m = 1 << n
        for s in range(1 << nq):
            out = basis_image(c, 2 * s)
            hi, lo = divmod(s, m)
            dest = s if hi else rule(lo, n)
            assert out[2 * dest] == 1
            assert np.count_nonzero(out) == 1


def test_kernel_n2_matches_classical():
    sub, leak = system_block(build_kernel(2, 3, 2))
    assert np.abs(sub - classical_kernel_matrix(2)).max() < 1e-12
    assert leak < 1e-14


@pytest.mark.parametrize("n, nq", [(3, 3), (3, 5), (4, 4)])
def test_kernel_direct_sum(n, nq):
    sub, leak = system_block(build_kernel(n, nq + 1, nq))
    ref = np.eye(1 << nq)
    m = 1 << n
    ref[:m, :m] = classical_kernel_matrix(n)
    assert np.abs(sub - ref).max() < 1e-12
    assert leak < 1e-14


@pytest.mark.parametrize("nq", [2, 3, 4, 5, 6])
def test_qwt_matches_classical(nq):
    sub, leak = system_block(build_qwt(nq))
    assert np.abs(sub - classical_dwt_matrix(nq)).max() < 1e-9
    assert leak < 1e-9


def test_stage_unitarity():
    for c in (build_kernel(3, 5, 4), build_shuffle(3, 5, 4), build_bit_reversal(4, 5, 4)):
        m = circuit_to_matrix(c)
        assert np.abs(m.conj().T @ m - np.eye(32)).max() < 1e-10


def test_ancilla_restored_on_product_states():
    rng = np.random.default_rng(0)
    c = build_qwt(5)
    for _ in range(5):
        sys = np.array([1.0 + 0j])
        for _ in range(5):
            a = rng.normal(size=2) + 1j * rng.normal(size=2)
            sys = np.kron(sys, a / np.linalg.norm(a))
        psi = np.kron(sys, [1, 0]).astype(complex)
        out = c.run(psi)
        assert np.sum(np.abs(out[1::2]) ** 2) < 1e-18


def test_classical_transform_properties():
    assert np.array_equal(classical_dwt_d4(np.zeros(8)), np.zeros(8))
    rng = np.random.default_rng(1)
    v = rng.normal(size=64) + 1j * rng.normal(size=64)
    w = classical_dwt_d4(v)
    assert abs(np.linalg.norm(w) - np.linalg.norm(v)) < 1e-12
    assert np.abs(classical_idwt_d4(w) - v).max() < 1e-12
    m = classical_dwt_matrix(3)
    assert np.abs(m.T @ m - np.eye(8)).max() < 1e-12
    with pytest.raises(ValueError):
        classical_dwt_d4(np.ones(6))


def test_kernel_rows():
    c = daubechies_coefficients()
    k = classical_kernel_matrix(3)
    assert np.allclose(k[0, :4], [c.c0, -c.c1, c.c2, -c.c3])
    assert np.allclose(k[1, :4], [-c.c3, -c.c2, -c.c1, -c.c0])
    # periodic wrap on the last row pair
    assert np.allclose(k[6, [6, 7, 0, 1]], [c.c0, -c.c1, c.c2, -c.c3])
