"""
Simulation: states, stabilizer witnesses and noise channels.
"""

from .noise import (
    Channel,
    NoiseModel,
    WhiteNoiseScope,
    dephase_dof,
    noise_sweep,
    visibility_state,
    white_noise,
    witness_noise_threshold,
)
from .observables import (
    ObservableSum,
    PauliString,
    WitnessForm,
    WitnessKind,
    WitnessName,
    evaluate_witness,
    pauli_expectation,
    settings_required,
    stabilizer,
    witness_operator,
)
from .qcore import (
    REGISTER,
    Bipartition,
    DensityMatrix,
    Dof,
    Party,
    QubitLabel,
    StateVector,
    Tolerances,
    density,
    entropy_of_entanglement,
    hyper_state,
    make_bell,
    partial_trace,
    tensor,
    von_neumann_entropy,
)

__all__ = [
    "REGISTER",
    "Bipartition",
    "DensityMatrix",
    "Dof",
    "Party",
    "QubitLabel",
    "StateVector",
    "Tolerances",
    "density",
    "entropy_of_entanglement",
    "hyper_state",
    "make_bell",
    "partial_trace",
    "tensor",
    "von_neumann_entropy",
    "ObservableSum",
    "PauliString",
    "WitnessForm",
    "WitnessKind",
    "WitnessName",
    "evaluate_witness",
    "pauli_expectation",
    "settings_required",
    "stabilizer",
    "witness_operator",
    "Channel",
    "NoiseModel",
    "WhiteNoiseScope",
    "dephase_dof",
    "noise_sweep",
    "visibility_state",
    "white_noise",
    "witness_noise_threshold",
]
