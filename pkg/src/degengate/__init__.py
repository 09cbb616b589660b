"""Design, simulate and benchmark one-step two-qubit gates at spectral-degeneracy points."""

__version__ = "0.1.0"

from .constructions import (
    LogBranch,
    OneStepGate,
    PulseSequence,
    PulseStep,
    cnot_class_pulse,
    cnot_log_family,
    onestep_bgate,
    onestep_cnot,
    protocol_comparison,
    refine_bgate,
    standard_cnot_protocol,
    target_gate,
)
from .hamiltonian import (
    DegeneracyReport,
    EigenSystem,
    HamiltonianParams,
    build_hamiltonian,
    classify_degeneracy,
    eigensystem,
    spectrum_optimal_point,
)
from .metrics import (
    GateReport,
    GateTarget,
    MakhlinInvariants,
    fidelity_score,
    gate_distance,
    is_equivalent,
    makhlin_invariants,
    report,
)
from .noise import NoiseModel, spectral_function
from .pauli import pauli_tensor
from .redfield import (
    DensityMatrix,
    PurityTrace,
    RedfieldTensor,
    gate_purity,
    initial_product_states,
    initial_purity_slope,
    lambda_rates,
    propagate,
    redfield_tensor,
    relax_time_check,
    sequence_gate_purity,
)
from .search import (
    CalibrationResult,
    OptimizeResult,
    SearchSpec,
    SensitivityReport,
    SweepGrid,
    SweepResult,
    calibrate,
    degeneracy_break_probe,
    fig1_grid,
    optimize,
    sensitivity,
    sweep,
)

__all__ = [
    "CalibrationResult",
    "DegeneracyReport",
    "DensityMatrix",
    "EigenSystem",
    "GateReport",
    "GateTarget",
    "HamiltonianParams",
    "LogBranch",
    "MakhlinInvariants",
    "NoiseModel",
    "OneStepGate",
    "OptimizeResult",
    "PulseSequence",
    "PulseStep",
    "PurityTrace",
    "RedfieldTensor",
    "SearchSpec",
    "SensitivityReport",
    "SweepGrid",
    "SweepResult",
    "build_hamiltonian",
    "calibrate",
    "classify_degeneracy",
    "cnot_class_pulse",
    "cnot_log_family",
    "degeneracy_break_probe",
    "eigensystem",
    "fidelity_score",
    "fig1_grid",
    "gate_distance",
    "gate_purity",
    "initial_product_states",
    "initial_purity_slope",
    "is_equivalent",
    "lambda_rates",
    "makhlin_invariants",
    "onestep_bgate",
    "onestep_cnot",
    "optimize",
    "pauli_tensor",
    "propagate",
    "protocol_comparison",
    "redfield_tensor",
    "refine_bgate",
    "relax_time_check",
    "report",
    "sensitivity",
    "sequence_gate_purity",
    "spectral_function",
    "spectrum_optimal_point",
    "standard_cnot_protocol",
    "sweep",
    "target_gate",
]
