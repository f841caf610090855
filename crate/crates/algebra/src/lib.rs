//! Exact truncated series over the rationals, plus the multi-index and
//! dilation bookkeeping shared by every other crate in the workspace.

mod error;
mod index;
pub mod linalg;
mod poly;
mod rational;
mod series;

pub use error::AlgebraError;
pub use index::{DilationSpec, MultiIndex, PowerClass};
pub use poly::{CompiledPoly, Poly};
pub use rational::{format_q, parse_q, q_from_f64_exact, q_int, q_to_f64, Q};
pub use series::{JetSeries, Keep, TruncationPolicy, Window};
