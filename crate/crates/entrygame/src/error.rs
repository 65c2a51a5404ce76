use thiserror::Error;

/// Crate-wide error type. Every variant names what went wrong and where:
/// domain errors carry the offending parameter key, solver failures carry the
/// stage they occurred in, and feasibility errors carry the branch.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter `{key}` {message} (got {value})")]
    Domain {
        key: &'static str,
        value: f64,
        message: &'static str,
    },

    #[error("config key `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("objective returned a non-finite value at x = {x}")]
    NonFinite { x: f64 },

    #[error("{branch} is infeasible: {reason}")]
    Infeasible {
        branch: &'static str,
        reason: &'static str,
    },

    #[error("solver failure in {stage}: {message}")]
    Solver {
        stage: &'static str,
        message: String,
    },

    #[error("classification is indeterminate: {0}")]
    Indeterminate(&'static str),

    #[error("i/o error on `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(key: &'static str, value: f64, message: &'static str) -> Self {
        Error::Domain {
            key,
            value,
            message,
        }
    }

    /// True when the error only states that a stage-zero branch has no
    /// admissible plan, as opposed to a hard solver or domain failure.
    pub fn is_infeasible(&self) -> bool {
        matches!(self, Error::Infeasible { .. })
    }
}
