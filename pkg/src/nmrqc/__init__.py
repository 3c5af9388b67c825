"""nmrqc: a liquid-state NMR quantum computing simulator.

Coupled spin-1/2 systems as density matrices, circuit-to-pulse
compilation with software rotating frames, evolution under pulses,
delays, gradients and relaxation, effective pure state preparation, and
spectral read-out with multiplet decoding.
"""

from .compiler import CompileError, CompileOptions, compile_circuit, compile_gate, route_cnot
from .engine import SimOptions, error_rate, relax, simulate, threshold_check
from .gates import (
    Circuit,
    Gate,
    apply_circuit,
    circuit_unitary,
    fft_reference,
    gate_matrix,
    qft_circuit,
    qft_matrix,
)
from .kernels import BACKEND as KERNEL_BACKEND
from .prep import logical_label, prep_cost, spatial_average, sv_spins_needed, temporal_average
from .pulses import PulseSequence, sequence_from_text, sequence_to_text
from .readout import FID, Spectrum, acquire, decode_bits, decode_neighbors, measure, spectrum, tomography
from .spin_system import HamiltonianModel, SpinSystem, internal_hamiltonian, load_system, multiplet_lines
from .states import (
    DensityMatrix,
    coherence_order_filter,
    distance,
    effective_pure_target,
    expectation,
    thermal_deviation,
)

__version__ = "0.1.0"

__all__ = [
    "CompileError",
    "CompileOptions",
    "Circuit",
    "DensityMatrix",
    "FID",
    "Gate",
    "HamiltonianModel",
    "KERNEL_BACKEND",
    "PulseSequence",
    "SimOptions",
    "Spectrum",
    "SpinSystem",
    "acquire",
    "apply_circuit",
    "circuit_unitary",
    "coherence_order_filter",
    "compile_circuit",
    "compile_gate",
    "decode_bits",
    "decode_neighbors",
    "distance",
    "effective_pure_target",
    "error_rate",
    "expectation",
    "fft_reference",
    "gate_matrix",
    "internal_hamiltonian",
    "load_system",
    "logical_label",
    "measure",
    "multiplet_lines",
    "prep_cost",
    "qft_circuit",
    "qft_matrix",
    "relax",
    "route_cnot",
    "sequence_from_text",
    "sequence_to_text",
    "simulate",
    "spatial_average",
    "spectrum",
    "sv_spins_needed",
    "temporal_average",
    "threshold_check",
    "thermal_deviation",
    "tomography",
]
