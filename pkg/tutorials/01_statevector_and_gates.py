"""Register basics: states, elementary gates and circuits.

Run with ``python3 tutorials/01_statevector_and_gates.py``.
"""

import numpy as np

from qwtsim import Circuit, basis_state, circuit_to_matrix, count_gates
from qwtsim.gates import cnot, format_circuit, mcx, parse_circuit, phase, ry, toffoli
from qwtsim.statevector import (
    apply_controlled_not,
    apply_single_qubit,
    inner_product,
    probability_distribution,
)

# Qubit 0 is the most significant bit of the basis index.
s = basis_state(3, 0)
h = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
s = apply_single_qubit(s, 0, h)
s = apply_controlled_not(s, 0, 1)
print("GHZ-like pair on qubits 0,1:", np.round(probability_distribution(s), 3))
print("norm:", inner_product(s, s).real)

# The same thing as a circuit object, applied with the compiled kernels.
c = Circuit(3, [ry(0, np.pi / 2), cnot(0, 1), phase(2, 0.3), toffoli(0, 1, 2)])
psi = basis_state(3, 0).amplitudes.astype(complex)
c.run(psi)
print("circuit result:", np.round(np.abs(psi) ** 2, 3))

# Text round trip and the full matrix.
text = format_circuit(c)
print(text)
assert np.array_equal(circuit_to_matrix(parse_circuit(text)), circuit_to_matrix(c))

# A 5-control NOT lowered to elementary gates with one clean ancilla.
big = Circuit(8, mcx([0, 1, 2, 3, 4], 5, ancilla=7))
print("5-control NOT:", count_gates(big))
