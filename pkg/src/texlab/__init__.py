"""Quantum-state texture: resource measures, free channels, and the
randomized identification of hidden-basis circuit layers."""

from __future__ import annotations

from .channels import (
    F1Decomposition,
    FreeChannelCertificate,
    KrausChannel,
    MonotonicityAudit,
    apply_channel,
    build_free_channel,
    build_free_channel_mixed,
    channel_from_json_dict,
    channel_to_json_dict,
    convert_from_f2,
    decompose_against_f1,
    monotonicity_audit,
    texture_free_certificate,
)
from .circuit import (
    CircuitLayer,
    CnotGate,
    GateKind,
    SingleGate,
    TrackOutput,
    gate_matrix,
    layer_from_json_dict,
    layer_to_json_dict,
    measure_grand_sums,
    run_layer,
    run_layer_with_inputs,
    standard_gate_matrix,
)
from .paramagnet import (
    averaged_rugosity_per_spin,
    coherent_grand_sum,
    corrected_closed_form,
    gibbs_state,
    magnetization,
    paramagnet_csv,
    paramagnet_report,
    reference_closed_form,
    reference_magnetization,
    sampled_rugosity_per_spin,
)
from .protocol import (
    DEFAULT_TAU,
    DEFAULT_TRIALS,
    CandidateBasis,
    IdentificationError,
    ProtocolReport,
    TrackStats,
    classify_single_qubit_gates,
    detect_cnot_tracks,
    detectability_margin,
    disambiguate,
    expected_averages,
    identify_layer,
    master_generator,
    noise_interval,
    pairing_probe,
    random_layer,
    recover_basis,
    report_to_json_dict,
    run_protocol,
    stats_to_csv,
)
from .serialize import ARTIFACT_VERSION, dumps_canonical
from .states import (
    BlochVector,
    DensityOperator,
    HaarQubitSample,
    QubitBasis,
    basis_distance,
    bloch_of,
    fourier_ket,
    fourier_matrix,
    ket_in_basis,
    qubit_from_bloch,
    sample_haar_angles,
    sample_haar_qubit,
)
from .texture import (
    TextureReading,
    additivity_check,
    grand_sum,
    imaginarity_qubit,
    projective_probability,
    rugosity,
    texture_report,
)

__version__ = "0.1.0"

__all__ = [
    "ARTIFACT_VERSION",
    "BlochVector",
    "CandidateBasis",
    "CircuitLayer",
    "CnotGate",
    "DEFAULT_TAU",
    "DEFAULT_TRIALS",
    "DensityOperator",
    "F1Decomposition",
    "FreeChannelCertificate",
    "GateKind",
    "HaarQubitSample",
    "IdentificationError",
    "KrausChannel",
    "MonotonicityAudit",
    "ProtocolReport",
    "QubitBasis",
    "SingleGate",
    "TextureReading",
    "TrackOutput",
    "TrackStats",
    "additivity_check",
    "apply_channel",
    "averaged_rugosity_per_spin",
    "basis_distance",
    "bloch_of",
    "build_free_channel",
    "build_free_channel_mixed",
    "channel_from_json_dict",
    "channel_to_json_dict",
    "classify_single_qubit_gates",
    "coherent_grand_sum",
    "convert_from_f2",
    "corrected_closed_form",
    "decompose_against_f1",
    "detect_cnot_tracks",
    "detectability_margin",
    "disambiguate",
    "dumps_canonical",
    "expected_averages",
    "fourier_ket",
    "fourier_matrix",
    "gate_matrix",
    "gibbs_state",
    "grand_sum",
    "identify_layer",
    "imaginarity_qubit",
    "ket_in_basis",
    "layer_from_json_dict",
    "layer_to_json_dict",
    "magnetization",
    "master_generator",
    "measure_grand_sums",
    "monotonicity_audit",
    "noise_interval",
    "pairing_probe",
    "paramagnet_csv",
    "paramagnet_report",
    "projective_probability",
    "qubit_from_bloch",
    "random_layer",
    "recover_basis",
    "reference_closed_form",
    "reference_magnetization",
    "report_to_json_dict",
    "rugosity",
    "run_layer",
    "run_layer_with_inputs",
    "run_protocol",
    "sample_haar_angles",
    "sample_haar_qubit",
    "sampled_rugosity_per_spin",
    "standard_gate_matrix",
    "stats_to_csv",
    "texture_free_certificate",
    "texture_report",
]
