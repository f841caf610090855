//! Discretized singular Radon transforms and maximal functions on grids,
//! the dyadic family W_j behind the maximal reduction, and norm estimation.

mod config;
mod family;
mod maximal;
mod norm;
mod singular;
mod sparse;

pub use config::{Cutoff, OperatorConfig, Sigma};
pub use family::{build_wj, embed_scale, reduce_maximal_pipeline, wj_taylor_identity, DyadicFamilySpec, PipelineOptions, Scale};
pub use maximal::{
    eval_maximal, eval_maximal_family, eval_mj, family_maps, hardy_littlewood, hl_constant, sup_average, FlowMode, MaximalMode,
    MaximalResult,
};
pub use norm::{estimate_opnorm, write_norm_table, NormEstimate, NormParams, NormRow};
pub use singular::{assemble_t, eval_t, kernel_nodes, resolved_kernel_nodes, NumericMap, PointMap, SeriesMap};
pub use sparse::{function_dump, function_from_dump, interp_stencil, interpolate, lp_norm, sample, Csr, LinearOp};

#[derive(Debug, thiserror::Error)]
pub enum OperatorError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("{count} quadrature images left the x grid, e.g. (x, t) = {examples:?}")]
    DomainEscape { count: usize, examples: Vec<(Vec<f64>, Vec<f64>)> },
    #[error("invalid dyadic family: {0}")]
    Spec(String),
    #[error("saturated input: {0}")]
    Saturated(String),
    #[error(transparent)]
    Kernel(#[from] radon_kernels::KernelError),
    #[error(transparent)]
    Surface(#[from] radon_surface::SurfaceError),
    #[error(transparent)]
    Prep(#[from] radon_prep::PrepError),
    #[error(transparent)]
    Lie(#[from] radon_lie::LieError),
    #[error(transparent)]
    Algebra(#[from] radon_algebra::AlgebraError),
}
