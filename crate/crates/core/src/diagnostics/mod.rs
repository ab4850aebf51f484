//! Finite-truncation checks of the structural identities behind the transform.

mod residuals;
mod riesz;
mod sums;

pub use residuals::{
    gain_backward_error, inverse_identity_residual, operator_equality_residual, tb_eq_b_residual, ModeResidual,
    ResidualKind, ResidualReport, OPERATOR_EQUALITY_TOLERANCE, TAIL_FACTOR, TAIL_WINDOW_FACTOR,
};
pub use riesz::{q_family, riesz_frame_bounds};
pub use sums::{
    aggregate_smoothing, check_denominator_bound, denominator_bound_region, quadratic_closeness, smoothing_sums,
    ClosenessReport, SmoothingReport, CAUCHY_THRESHOLD,
};
