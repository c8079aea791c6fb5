"""Quantum teleportation simulator and information-theory toolkit."""
from .qcore import (
    BELL_KINDS,
    DensityOperator,
    MeasurementBasis,
    StateVector,
    UnitaryOperator,
    apply_unitary,
    bell_basis,
    bell_state,
    bloch_vector,
    density_from_state,
    fidelity,
    make_state,
    measure,
    partial_trace,
    reduced_state,
    tensor,
)
from .infotheory import (
    POVM,
    QuantumEnsemble,
    channel_capacity,
    empirical_coding_rate,
    holevo_chi,
    mutual_information,
    povm_mutual_information,
    shannon_entropy,
    typical_subspace,
    von_neumann_entropy,
)
from .teleport import (
    UnknownState,
    bell_decomposition,
    bohm_branch_analysis,
    build_initial,
    correction_interaction_ub,
    correction_unitary,
    factorization_structure,
    measurement_interaction_ua,
    no_signalling_check,
    run_bohm,
    run_collapse,
    run_ensemble,
    run_protocol,
    run_unitary,
)
from .experiments import (
    SphereGrid,
    StateSource,
    coarse_grain_sphere,
    cost_ledger,
    spec_vs_accessible,
    specification_information,
)
from .rng import trial_rng

__all__ = [
    "BELL_KINDS",
    "DensityOperator",
    "MeasurementBasis",
    "StateVector",
    "UnitaryOperator",
    "apply_unitary",
    "bell_basis",
    "bell_state",
    "bloch_vector",
    "density_from_state",
    "fidelity",
    "make_state",
    "measure",
    "partial_trace",
    "reduced_state",
    "tensor",
    "POVM",
    "QuantumEnsemble",
    "channel_capacity",
    "empirical_coding_rate",
    "holevo_chi",
    "mutual_information",
    "povm_mutual_information",
    "shannon_entropy",
    "typical_subspace",
    "von_neumann_entropy",
    "UnknownState",
    "bell_decomposition",
    "bohm_branch_analysis",
    "build_initial",
    "correction_interaction_ub",
    "correction_unitary",
    "factorization_structure",
    "measurement_interaction_ua",
    "no_signalling_check",
    "run_bohm",
    "run_collapse",
    "run_ensemble",
    "run_protocol",
    "run_unitary",
    "SphereGrid",
    "StateSource",
    "coarse_grain_sphere",
    "cost_ledger",
    "spec_vs_accessible",
    "specification_information",
    "trial_rng",
]

__version__ = "0.1.0"
