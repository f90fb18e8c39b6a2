"""Spatially multiplexed quantum reservoir computing.

Exact simulation of small random transverse-field Ising reservoirs driven by
an input stream, temporal and spatial multiplexing of their signals, linear
readout training, NARMA and memory-capacity benchmarks, an echo-state-network
baseline, and the exact projector theory of combining reservoirs.
"""

from .qcore import (
    DensityMatrix,
    IsingHamiltonian,
    PauliTransferMatrix,
    Propagator,
    build_ising_hamiltonian,
    channel_to_ptm,
    density_from_pauli_vector,
    evolve,
    expect_z,
    identity_channel,
    inject_input,
    injection_channel,
    input_qubit_state,
    pauli_basis,
    pauli_labels,
    pauli_vector,
    propagator,
    random_density,
    trace_out_qubit,
    unitary_channel,
    z_expectations,
)
from .readout import (
    MAX_DELAY,
    ReadoutWeights,
    fit,
    fit_many,
    memory_capacity,
    memory_function,
    nmse,
    predict,
)
from .reservoir import (
    ESNConfig,
    EnsembleConfig,
    FeatureMatrix,
    QRSystem,
    QRSystemConfig,
    esn_run,
    run_ensemble,
)
from .tasks import (
    NARMA_ORDERS,
    NarmaDivergenceError,
    NarmaSpec,
    PhaseProtocol,
    TaskResult,
    delay_targets,
    evaluate_features,
    generate_input,
    improvement_ratio,
    narma_targets,
    run_trial,
)
from .theory import (
    CombinationBounds,
    PartnerDecision,
    RegressionInstance,
    combination_bounds,
    projector,
    residual_sq,
    select_partner,
)

__version__ = "0.1.0"

__all__ = [
    "DensityMatrix", "IsingHamiltonian", "Propagator", "PauliTransferMatrix",
    "build_ising_hamiltonian", "propagator", "evolve", "inject_input",
    "expect_z", "z_expectations", "input_qubit_state", "trace_out_qubit",
    "random_density", "pauli_basis", "pauli_labels", "pauli_vector",
    "density_from_pauli_vector", "channel_to_ptm", "identity_channel",
    "unitary_channel", "injection_channel",
    "QRSystemConfig", "QRSystem", "EnsembleConfig", "FeatureMatrix",
    "run_ensemble", "ESNConfig", "esn_run",
    "ReadoutWeights", "fit", "fit_many", "predict", "nmse",
    "memory_function", "memory_capacity", "MAX_DELAY",
    "NarmaSpec", "NarmaDivergenceError", "PhaseProtocol", "TaskResult",
    "NARMA_ORDERS", "generate_input", "narma_targets", "delay_targets",
    "run_trial", "evaluate_features", "improvement_ratio",
    "RegressionInstance", "CombinationBounds", "PartnerDecision",
    "projector", "residual_sq", "combination_bounds", "select_partner",
]
