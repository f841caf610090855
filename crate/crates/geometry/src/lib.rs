//! Carnot–Carathéodory balls and the control relation between weighted fields.

mod ball;
mod control;
mod rank;

pub use ball::{cc_ball_sample, delta_power, loglog_slope, BallParams, BallSample, ControlKind, ControlPath};
pub use control::{
    control_check, control_check_w, delta_grid, replay_control, verify_refutation, w_taylor_fields, CoefficientWitness,
    ControlCertificate, ControlParams, GrowthBound, RefutationWitness, Status, WControlCertificate,
};
pub use rank::bareiss_rank;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeometryError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("inconsistent verdict: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Lie(#[from] radon_lie::LieError),
    #[error(transparent)]
    Algebra(#[from] radon_algebra::AlgebraError),
    #[error(transparent)]
    Prep(#[from] radon_prep::PrepError),
}
