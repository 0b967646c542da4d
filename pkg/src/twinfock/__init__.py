"""twinfock: phase-estimation precision of two-port interferometers fed
with partially distinguishable photon pairs.

The package computes quantum and classical Fisher information for
twin-Fock probes whose photons carry a distinguishing label, including
white-noise mixtures, three projective measurement families on the
single-pair sector, and a full simulation of the photon-pair counting
experiment (Poisson counts, linear fits, Monte-Carlo error bars, noise
estimation).
"""

__version__ = "0.1.0"

from twinfock._kernels import backend as kernel_backend  # noqa: F401
from twinfock.fock import (  # noqa: F401
    FockBasis,
    Mode,
    PathLabel,
    PureState,
    DensityOperator,
    HermitianOperator,
    Spectrum,
    build_basis,
    annihilation_matrix,
    jy_operator,
    phase_generator,
    number_operator,
    expectation,
    covariance,
    variance,
    eigendecompose,
    occupation_label,
    sector_dimension,
)
from twinfock.probes import (  # noqa: F401
    ProbeSpec,
    PreparationAngle,
    pure_probe,
    mixed_probe,
    two_photon_probe,
    indistinguishability_from_angle,
)
from twinfock.evolution import (  # noqa: F401
    PhaseUnitary,
    HwpSetting,
    phase_unitary,
    apply_unitary,
    derivative_state,
    hwp_mode_matrix,
    hwp_interferometer,
)
from twinfock.measurement import (  # noqa: F401
    MeasurementOutcome,
    ProjectiveMeasurement,
    ProbabilityTable,
    standard_measurement,
    coarse_measurement,
    noisy_optimal_measurement,
    outcome_probabilities,
    probability_grid,
    standard_probability_curves,
    coarse_probability_curves,
)
from twinfock.fisher import (  # noqa: F401
    DegeneratePhaseError,
    DivergentFisherTermError,
    DenominatorUnderflowError,
    QfiResult,
    Thresholds,
    FisherCurve,
    classical_fi,
    fi_curve,
    fi_of_curves,
    qfi_pure,
    qfi_mixed,
    qfi_formula_pure,
    qfi_formula_pure_parts,
    qfi_formula_mixed,
    mixture_reduction_factor,
    path_variance_formulas,
    thresholds,
    qcrb,
    noisy_fi_formula,
    noisy_fi_values,
    coarse_fi_formula,
    coarse_fi_values,
    mprime_fi_formula,
    mprime_fi_values,
    max_fisher_phi,
    max_noisy_fi,
    max_fi_of_curves,
)
from twinfock.experiment import (  # noqa: F401
    ExperimentConfig,
    CountRecord,
    FitResult,
    FitBundle,
    NoiseEstimate,
    McStats,
    SummaryRow,
    UnidentifiableFitError,
    NoiseTargetError,
    noisy_standard_curves,
    simulate_counts,
    fit_probability,
    fit_records,
    fitted_curves_fn,
    fi_from_fit,
    max_fitted_fi,
    monte_carlo_errorbars,
    estimate_noise,
    fi_summary_table,
    scaled_config,
)
