pub mod config;
pub mod dsl;
pub mod pipeline;
pub mod report;

pub use config::{parse_config, ProblemConfig};
pub use dsl::{parse_field, parse_gamma_dsl, parse_poly, print_surface, same_surface, DslError, DslErrorKind, GammaContext};
pub use pipeline::{identity_scales, random_function, run_pipeline, run_verify, wj_identities, Command};
pub use report::{Report, Table, VerdictRecord, SCHEMA, SCHEMA_VERSION};

/// A failed stage and its diagnostics.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{stage}: {message}")]
pub struct CliError {
    pub stage: String,
    pub message: String,
}

impl CliError {
    pub fn new(stage: &str, message: impl Into<String>) -> Self {
        CliError { stage: stage.into(), message: message.into() }
    }

    /// 2 for configuration and parse errors, 1 for failed stages.
    pub fn exit_code(&self) -> i32 {
        match self.stage.as_str() {
            "config" | "dsl" => 2,
            _ => 1,
        }
    }
}
