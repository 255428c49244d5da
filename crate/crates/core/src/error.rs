use thiserror::Error;

pub type Result<T> = std::result::Result<T, BdgError>;

#[derive(Debug, Error)]
pub enum BdgError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invariant violated: {what} (value {value:e}{})", at_time(*t))]
    InvariantViolation {
        what: String,
        value: f64,
        t: Option<f64>,
    },

    #[error("no convergence in {what} after {iterations} iterations (last residual {residual:e})")]
    NonConvergence {
        what: String,
        iterations: usize,
        residual: f64,
    },

    #[error("T_c outside bracket [{lo}, {hi}]: lowest eigenvalues {value_lo:e}, {value_hi:e} do not straddle zero")]
    TcOutsideBracket {
        lo: f64,
        hi: f64,
        value_lo: f64,
        value_hi: f64,
    },

    #[error("non-degeneracy violated: spectral gap {0:e} below tolerance")]
    Degenerate(f64),

    #[error("h too large: max (gamma - 1/2)^2 + |alpha|^2 exceeds 1/4 by {excess:e}")]
    HTooLarge { excess: f64 },

    #[error("resolution error: {0}")]
    Resolution(String),

    #[error("config error in `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn at_time(t: Option<f64>) -> String {
    t.map(|t| format!(" at t = {t}")).unwrap_or_default()
}

impl BdgError {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        BdgError::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub fn invariant(what: impl Into<String>, value: f64) -> Self {
        BdgError::InvariantViolation {
            what: what.into(),
            value,
            t: None,
        }
    }

    /// Process exit status for the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            BdgError::Config { .. } | BdgError::Parse(_) => 2,
            BdgError::InvariantViolation { .. } | BdgError::HTooLarge { .. } | BdgError::Degenerate(_) => 3,
            BdgError::NonConvergence { .. } | BdgError::TcOutsideBracket { .. } => 4,
            _ => 1,
        }
    }
}
