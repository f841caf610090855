//! Monomial orders, division with remainder in truncated series modules,
//! Taylor preparation and constructive finite generation.

mod finite;
mod galligo;
mod module;
mod order;
mod taylor;

pub use finite::{
    finite_generate, replay_field_combination, replay_generation, solve_field_combination, FiniteGeneration,
    GenCertificate,
};
pub use galligo::{division_residual, galligo_divide, newton_data, window_monomials, Division, NewtonData, TruncatedModule};
pub use module::{replay_poly_module, solve_poly_module};
pub use order::{draw_order_weights, OrderWeights};
pub use taylor::{normalization_holds, reconstruct, taylor_prepare, PrepTerm, Preparation};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PrepError {
    #[error("order weights: {0}")]
    Order(String),
    #[error("order is not injective on the exponents in play: {0}")]
    NotInjective(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("internal consistency check failed: {0}")]
    Internal(String),
}
