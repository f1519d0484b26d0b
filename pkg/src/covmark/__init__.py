"""Covariance-shaped watermark design against optimal linear removal attacks.

Core objects: validated covariance matrices and seeded Gaussian ensembles
(:mod:`covmark.core`), matrix Wiener filtering (:mod:`covmark.wiener`),
the attacker's closed-form optimum (:mod:`covmark.attack`), the watermark
design optimum and its verification oracles (:mod:`covmark.design`), the
stationary Toeplitz limit (:mod:`covmark.wss`), and a config-driven
experiment pipeline (:mod:`covmark.harness`).
"""

from .attack import (
    AttackSolution,
    apply_attack,
    attack_distortion,
    attack_matrix,
    average_correlation,
    solve_attack,
    watermark_wiener,
)
from .core import (
    CovarianceMatrix,
    SampleBatch,
    ar1_autocorr,
    average_power,
    empirical_covariance,
    load_covariance_csv,
    make_covariance,
    modulate,
    sample_ensemble,
    save_covariance_csv,
    substream,
    toeplitz_from_autocorr,
)
from .design import (
    DesignSolution,
    GeometryReport,
    brute_force_best_covariance,
    estimated_watermark_covariance,
    geometry_report,
    optimal_watermark_covariance,
    residual_energy,
    stationarity_residual,
    tangent_gradient_check,
)
from .errors import (
    ConfigError,
    CovmarkError,
    DegenerateWatermarkError,
    DimensionMismatchError,
    FactorizationError,
    InvalidParamError,
    NotPSDError,
    NotSymmetricError,
    NotToeplitzError,
    SingularSumError,
    TooFewSamplesError,
)
from .harness import (
    ExperimentConfig,
    ExperimentRow,
    build_host_covariance,
    build_strategy_covariance,
    emit_csv,
    gamma_residual_energy,
    load_config,
    parse_config_text,
    run_experiment,
)
from .wiener import (
    FilterMatrix,
    analytic_mse,
    error_covariance,
    estimate,
    make_filter,
    wiener_filter,
)
from .wss import (
    PsdConditionReport,
    SpectralModel,
    ar1_psd,
    psd_condition_check,
    toeplitz_eigen_gap,
    with_eigenvalues,
)

__version__ = "0.1.0"
