use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// One entry per violated parameter invariant.
    #[error("invalid parameters: {}", .0.join("; "))]
    InvalidParams(Vec<String>),

    #[error("{}: {message}", path.display())]
    Config { path: PathBuf, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{function}: argument out of domain ({detail})")]
    Domain {
        function: &'static str,
        detail: String,
    },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("no unique stationary distribution: {0}")]
    NoStationary(String),

    #[error("empty rate grid: {0}")]
    EmptyGrid(String),

    #[error("degenerate estimate: {0}")]
    Degenerate(String),

    #[error("unknown preset `{0}` (available: fig2, fig3, fig4, fig5)")]
    UnknownPreset(String),

    #[error("invalid experiment: {0}")]
    Experiment(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("plot: {0}")]
    Plot(String),
}

pub type Result<T> = std::result::Result<T, Error>;
