"""The D4 wavelet transform as a circuit, checked against the classical pyramid.

Run with ``python3 tutorials/02_quantum_wavelet_transform.py``.
"""

import numpy as np

from qwtsim import build_qwt, circuit_to_matrix, classical_dwt_d4, classical_idwt_d4, count_gates
from qwtsim.qwt import classical_dwt_matrix, daubechies_coefficients

c = daubechies_coefficients()
print("D4 coefficients:", c)

# Classical pyramid on a smooth signal: energy collects in few coefficients.
x = np.sin(np.linspace(0, 2 * np.pi, 64, endpoint=False))
w = classical_dwt_d4(x)
print("largest |w|:", np.sort(np.abs(w))[-4:].round(3))
print("round trip error:", np.abs(classical_idwt_d4(w) - x).max())

# The circuit acts on nq system qubits plus one ancilla (the last qubit).
for nq in range(2, 7):
    qwt = build_qwt(nq)
    m = circuit_to_matrix(qwt)
    err = np.abs(m[::2, ::2] - classical_dwt_matrix(nq)).max()
    print(f"nq={nq}: {count_gates(qwt).total:5d} gates, max deviation {err:.1e}")
