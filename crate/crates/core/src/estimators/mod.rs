//! Disorder-averaged experiments built on exact eigenvalue counts.

mod birman_solomyak;
mod mc;
mod model;
mod ssf;
mod wegner;

pub use birman_solomyak::{
    birman_solomyak_residual, gauss_legendre, smoothstep, smoothstep_derivative, BirmanSolomyakReport,
};
pub use mc::{sample_map, LinearFit, McEstimate};
pub use mc::least_squares;
pub use model::{Ensemble, ModelConfig, DEFAULT_LOCALIZED_WINDOW, DEFAULT_MIN_SIDE, STRONG_DISORDER_2D};
pub use ssf::{
    averaged_ssf, default_side_rule, kirsch_series, ssf_scaling_exponent, SsfReport, SsfScalingReport,
};
pub use wegner::{
    check_reverse_wegner_admissible, dos_estimate, expected_counting_increment, idos_curve, reverse_wegner_ratio,
    wegner_ratio, Direction, WegnerReport,
};
