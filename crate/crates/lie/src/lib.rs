//! Polynomial vector fields, brackets, Campbell–Hausdorff and weighted
//! bracket closures.

mod bch;
mod closure;
mod field;
mod weighted;

pub use bch::{bch_log, exp_map, BCH_MAX_ORDER};
pub use closure::{
    compare_spans, hoermander_check, lie_closure, provenance_consistent, span_at_degree, span_of, ClosureSet, Flavor,
    HoermanderReport, SpanComparison, SpanInfo, SpanPoint,
};
pub use field::{sum_fields, VectorField};
pub use weighted::{lie_bracket, BracketWord, WeightedField};

use radon_algebra::AlgebraError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LieError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("formal degree must be nonzero")]
    ZeroDegree,
    #[error("Campbell-Hausdorff order {0} exceeds the supported maximum of 4")]
    BchOrder(u32),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}
