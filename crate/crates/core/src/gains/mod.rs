//! Feedback gains and the Fredholm transform they induce.

mod admissible;
mod potential;
mod synthesis;
mod transform;

pub use admissible::{
    admissibility, certified_radius, ensure_admissible, is_admissible_lambda, nearest_canonical, Admissibility,
    RESONANCE_TOLERANCE,
};
pub use potential::{Envelope, PotentialProfile, PotentialSpec};
pub use synthesis::{
    build_q_vector, denominator, feedback_evaluate, gain_system_matrix, interior_cutoff, solve_gains, GainBounds,
    GainProfile, GainStats, ParityGains,
};
pub use transform::{apply_inverse, apply_transform, assemble_transform, FredholmTransform, TransformPair, INVERSE_TOLERANCE};
