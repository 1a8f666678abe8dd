"""Gate-level simulation of the kicked wavelet rotor on a quantum register."""

from .analysis import (
    EvolutionRecord,
    find_tf,
    fidelity,
    fit_scaling,
    ipr,
    level_spacing_stats,
    matrix_element_decay,
    quasi_energy_spectrum,
    threshold_epsilon_s,
    window_average,
)
from .gates import Circuit, Gate, circuit_to_matrix, count_gates
from .noise import Ideal, NoisyGates, PseudoStatic, Static
from .qwt import build_qwt, classical_dwt_d4, classical_idwt_d4, classical_dwt_matrix
from .rotor import MapParams, build_map_circuit, evolve, exact_map_apply, exact_map_matrix
from .statevector import StateVector, basis_state

__version__ = "0.1.0"
