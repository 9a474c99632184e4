//! Error taxonomy shared by the library and the CLI.
//!
//! Variants are grouped by the process exit code the CLI maps them to:
//! exit 2 for configuration/usage problems, exit 3 for numerical or
//! convergence failures, exit 4 for violated mathematical invariants
//! (the last group signals a discretization or assembly bug, not bad input).

use thiserror::Error;

pub type Result<T> = std::result::Result<T, SpecError>;

#[derive(Debug, Error)]
pub enum SpecError {
    // ---- configuration / usage (exit 2) ----
    #[error("configuration error: {0}")]
    Config(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("consistency error: {0}")]
    Consistency(String),
    #[error("dependency error: {0}")]
    Dependency(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("format error: {0}")]
    Format(String),

    // ---- numerical / convergence (exit 3) ----
    #[error("convergence error: {0}")]
    Convergence(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("contour error: {0}")]
    Contour(String),
    #[error("degeneracy error: {0}")]
    Degeneracy(String),
    #[error("refinement request: {0}")]
    Refinement(String),

    // ---- invariant violations (exit 4) ----
    #[error("invariant violation: {0}")]
    Invariant(String),
    #[error("positivity error: {0}")]
    Positivity(String),
    #[error("assembly error: {0}")]
    Assembly(String),
}

impl SpecError {
    /// Process exit code the CLI maps this error to
    /// (0 = ok, 2 = config, 3 = numeric/convergence, 4 = invariant violation).
    pub fn exit_code(&self) -> i32 {
        use SpecError::*;
        match self {
            Config(_) | Shape(_) | Domain(_) | Consistency(_) | Dependency(_) | Usage(_)
            | Io(_) | Format(_) => 2,
            Convergence(_) | Numeric(_) | NotFound(_) | Contour(_) | Degeneracy(_)
            | Refinement(_) => 3,
            Invariant(_) | Positivity(_) | Assembly(_) => 4,
        }
    }
}

impl From<ndarray_linalg::error::LinalgError> for SpecError {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        SpecError::Numeric(format!("dense linear algebra: {e}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_the_documented_grouping() {
        assert_eq!(SpecError::Config("x".into()).exit_code(), 2);
        assert_eq!(SpecError::Shape("x".into()).exit_code(), 2);
        assert_eq!(SpecError::Convergence("x".into()).exit_code(), 3);
        assert_eq!(SpecError::Degeneracy("x".into()).exit_code(), 3);
        assert_eq!(SpecError::Invariant("x".into()).exit_code(), 4);
        assert_eq!(SpecError::Positivity("x".into()).exit_code(), 4);
    }
}
