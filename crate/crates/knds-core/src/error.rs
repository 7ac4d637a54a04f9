use thiserror::Error;

/// Errors surfaced by the computational modules.
///
/// Parameter *rejection* is not an error (see
/// [`crate::geometry::Admissibility`]); these variants cover genuine
/// numerical or configuration failures.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("root isolation failed: {0}")]
    RootIsolation(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("series coupling cap exceeded: |z|*A = {za:.3} > {cap:.1}; use the ODE path")]
    SeriesCap { za: f64, cap: f64 },

    #[error("eigenvalue solver failed to converge for l = {l}: {detail}")]
    EigenConvergence { l: u32, detail: String },

    #[error("refusing fit: {0}")]
    FitRefused(String),

    #[error("ill-conditioned system: {0}")]
    IllConditioned(String),
}

pub type Result<T> = std::result::Result<T, Error>;
