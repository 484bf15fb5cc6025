use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error(
        "kernel quadrature did not converge for beta={beta}, delta_v={delta_v}, q={q} \
         (panel budget {budget} exhausted, error estimate {estimate:.3e})"
    )]
    QuadratureBudget {
        beta: f64,
        delta_v: f64,
        q: f64,
        budget: usize,
        estimate: f64,
    },

    #[error("non-finite value in propagator integration at q={q}")]
    NonFinite { q: f64 },

    #[error("half-maximum not bracketed: G stays above 0.5 up to delta_v={last_delta}")]
    HalfMaxNotBracketed { last_delta: f64 },

    #[error("config {path}:{line}: {reason}")]
    Config {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
