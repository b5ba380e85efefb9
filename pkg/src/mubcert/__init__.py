"""Self-testing certification of mutually unbiased bases from QRAC statistics."""

__version__ = "0.1.0"

from .certify import (
    CertificateReport,
    bound_entropic,
    bound_incompatibility,
    bound_max_sqrt_overlap,
    bound_norm_sum,
    bound_overlap_entropy,
    full_certificate,
    min_asp_for_nontrivial_eta,
    mub_incompat_value,
    norm_sum_threshold,
    propagate_error,
)
from .counts import CountsTable, read_counts_csv, write_counts_csv
from .linalg import eig_hermitian, operator_norm, psd_sqrt, validate_povm
from .mub import (
    Measurement,
    MubPair,
    fourier_mub_pair,
    hadamard_mub_pair_d4,
    is_mutually_unbiased,
    max_sqrt_overlap,
    norm_sum,
    overlap_entropy,
)
from .photonics import (
    InterferometerConfig,
    PhaseNoiseConfig,
    PhaseState,
    analysis_kets,
    calibrate_drift_sigma,
    detection_probabilities,
    expected_outcome_probabilities,
    fringe_visibility,
    ideal_expected_counts,
    mbs_matrix,
    mean_fringe_visibility,
    measurement_phase_for_input,
    measurement_unitary,
    noise_averaged_asp,
    prepare_state,
    sample_source,
    settings_for_state,
    simulate_counts,
    stabilize_phases,
)
from .qrac import (
    AspEstimate,
    EncodingTable,
    asp,
    asp_from_density,
    brute_force_optimal_asp,
    estimate_asp,
    optimal_states,
    quantum_optimum,
)

__all__ = [
    "__version__",
    "AspEstimate",
    "CertificateReport",
    "CountsTable",
    "EncodingTable",
    "InterferometerConfig",
    "Measurement",
    "MubPair",
    "PhaseNoiseConfig",
    "PhaseState",
    "analysis_kets",
    "asp",
    "asp_from_density",
    "bound_entropic",
    "bound_incompatibility",
    "bound_max_sqrt_overlap",
    "bound_norm_sum",
    "bound_overlap_entropy",
    "brute_force_optimal_asp",
    "calibrate_drift_sigma",
    "detection_probabilities",
    "eig_hermitian",
    "estimate_asp",
    "expected_outcome_probabilities",
    "fourier_mub_pair",
    "fringe_visibility",
    "full_certificate",
    "hadamard_mub_pair_d4",
    "ideal_expected_counts",
    "is_mutually_unbiased",
    "max_sqrt_overlap",
    "mbs_matrix",
    "mean_fringe_visibility",
    "measurement_phase_for_input",
    "measurement_unitary",
    "min_asp_for_nontrivial_eta",
    "mub_incompat_value",
    "noise_averaged_asp",
    "norm_sum",
    "norm_sum_threshold",
    "operator_norm",
    "optimal_states",
    "overlap_entropy",
    "prepare_state",
    "propagate_error",
    "psd_sqrt",
    "quantum_optimum",
    "read_counts_csv",
    "sample_source",
    "settings_for_state",
    "simulate_counts",
    "stabilize_phases",
    "validate_povm",
    "write_counts_csv",
]
