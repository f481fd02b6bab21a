//! Two-state discrimination of pure quantum states from n-sample means.
//!
//! - [`linalg`]: small dense complex vectors and Hermitian operators.
//! - [`discrimination`]: discernability, the `tan(theta)` bound, its
//!   saturation conditions and the family of observables that reach it.
//! - [`sampling`]: outcome distributions, the threshold identification rule
//!   and seeded Monte Carlo estimates of its error.
//! - [`optimizer`]: derivative-free search used to cross-check the closed forms.

pub mod discrimination;
pub mod error;
pub mod linalg;
pub mod optimizer;
pub mod sampling;
pub mod tolerance;

pub use discrimination::{
    build_onb, check_qmie, check_saturation, detection_prob, discernability, fleming_bound, min_error_prob,
    overlap_of_angle, qmie_gap, rotated_observable, saturating_observable, simple_optimal, unambiguous_max, unambiguous_optimum,
    Discernability, DiscriminationStats, Outcome, SaturatingFamilySpec, SaturationReport, UnambiguousOptimum,
    UnambiguousRegime,
};
pub use error::{Error, Result};
pub use linalg::{
    angle_between, eigendecompose, expectation, inner, make_state_pair, uncertainty, ComplexVector,
    HermitianOperator, SpectralDecomposition, StatePair,
};
pub use optimizer::{maximize_delta, maximize_detection, to_hermitian, HermitianParams, SearchConfig, SearchResult};
pub use sampling::{
    chebyshev_bound, chebyshev_check, exact_tail, identify, outcome_distribution, run_experiment, sample_mean,
    threshold, ChebyshevCheck, Label, OutcomeDistribution, ThresholdRule, TrialReport,
};
pub use tolerance::Tolerances;

pub use num_complex::Complex64;
