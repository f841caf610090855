//! The γ side: surfaces, the W field, exponential fields, and the
//! curvature-type conditions (I), (II), (III).

mod conditions;
pub mod corpus;
mod surface;

pub use conditions::{
    check_all, check_condition, closure_is_complete, span_lemma, CheckParams, Condition, ConditionVerdict, Controlled, Witness,
};
pub use radon_geometry::Status;
pub use surface::{
    compose_surfaces, extract_exp_fields, gamma_to_w, invert_surface, param_field, partition_pure, w_to_gamma,
    w_to_gamma_numeric, FieldMap, NumericFlow, NumericFlowMap, PartEntry, Surface, SurfaceForm, WField,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SurfaceError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("internal consistency check failed: {0}")]
    Internal(String),
    #[error(transparent)]
    Algebra(#[from] radon_algebra::AlgebraError),
    #[error(transparent)]
    Lie(#[from] radon_lie::LieError),
    #[error(transparent)]
    Prep(#[from] radon_prep::PrepError),
    #[error(transparent)]
    Geometry(#[from] radon_geometry::GeometryError),
}
