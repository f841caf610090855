//! Dyadic kernels K = Σ_j ς_j^{(2^j)} built from tensor polynomial bumps,
//! their grid synthesis, and measured product-kernel size constants.

mod bump;
mod dump;
mod synth;

pub use bump::{make_bump_family, BumpFamily, BumpParams, Factor, FamilyBound, Profile, TensorBump};
pub use dump::GridDump;
pub use synth::{
    drift, synth_kernel, validate_product_bounds, BoundConstant, DyadicKernel, GridKernel, GridSpec, MIN_POINTS_PER_SCALE,
};

#[derive(Debug, thiserror::Error)]
pub enum KernelError {
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("axis {axis} resolves the finest scale with {points:.1} points, need {required}")]
    UnderResolved { axis: usize, points: f64, required: usize },
    #[error("grid domain: {0}")]
    Domain(String),
    #[error("not a product structure: {0}")]
    NonProduct(String),
    #[error("grid dump: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
