"""Trapped-ion simulation of nonlinear collective spin models.

Conditional displacements of a shared vibrational mode, arranged as a
commutator loop, leave behind spin-only unitaries such as
``exp(-i θ Jz^2)`` whatever the motional state. The package builds those
pulse sequences, certifies the vibrational factorization and runs the
applications: cat states, the quantum kicked top and its classical limit,
readout-ion measurement records and the Ising / controlled-phase gate.
"""
from .boson import FockMode, displacement, quadrature, reference_state
from .classical import SpherePoint, classical_step, classical_trajectory, lyapunov_estimate
from .protocols import (KickedTopParams, cat_state_protocol, controlled_phase,
                        evolve_kicked_top, floquet_operator, ising_gate, measurement_record,
                        readout_coupling)
from .pulses import (Carrier, ConditionalDisplacement, SpinWeight, compose,
                     conditional_displacement_unitary, factor_vibration, loop_sequence,
                     verify_nonlinear_top)
from .spin import (SpinRegister, SpinState, carrier_rotation, collective_operator,
                   embed_symmetric_into_full, husimi_grid, measure_jz, single_ion_operator,
                   spin_coherent_state)
from .tensor import distance_up_to_global_phase, matrix_exponential, tensor_product

__version__ = "0.1.0"

__all__ = [
    "Carrier", "ConditionalDisplacement", "FockMode", "KickedTopParams", "SpherePoint",
    "SpinRegister", "SpinState", "SpinWeight", "carrier_rotation", "cat_state_protocol",
    "classical_step", "classical_trajectory", "collective_operator", "compose",
    "conditional_displacement_unitary", "controlled_phase", "displacement",
    "distance_up_to_global_phase", "embed_symmetric_into_full", "evolve_kicked_top",
    "factor_vibration", "floquet_operator", "husimi_grid", "ising_gate", "loop_sequence",
    "lyapunov_estimate", "matrix_exponential", "measure_jz", "measurement_record",
    "quadrature", "readout_coupling", "reference_state", "single_ion_operator",
    "spin_coherent_state", "tensor_product", "verify_nonlinear_top",
]
