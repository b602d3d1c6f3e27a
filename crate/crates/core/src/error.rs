use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("drift matrix is singular at omega = {omega:e}")]
    Singular { omega: f64 },

    #[error("system is unstable (largest eigenvalue real part {max_real_part:e}{})",
        if *.marginal { ", marginal" } else { "" })]
    Unstable { max_real_part: f64, marginal: bool },

    #[error("quadrature did not converge after {panels} panels (error estimate {estimate:e}, target {target:e})")]
    NonConvergence {
        estimate: f64,
        target: f64,
        panels: usize,
    },

    #[error("quadrature tolerance {0:e} outside the supported range [1e-14, 1e-2]")]
    InvalidTolerance(f64),

    #[error("unphysical input: {0}")]
    Unphysical(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("bracket [{lo:e}, {hi:e}] is too small to search")]
    BracketTooSmall { lo: f64, hi: f64 },

    #[error("objective failed at {at:e}: {source}")]
    Evaluation {
        at: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// The innermost error, looking through [`Error::Evaluation`].
    pub fn root(&self) -> &Error {
        match self {
            Error::Evaluation { source, .. } => source.root(),
            e => e,
        }
    }

    /// Short stable identifier used in CSV error markers.
    pub fn code(&self) -> &'static str {
        match self.root() {
            Error::InvalidParameter { .. } => "invalid-parameter",
            Error::Singular { .. } => "singular",
            Error::Unstable { .. } => "unstable",
            Error::NonConvergence { .. } => "non-convergence",
            Error::InvalidTolerance(_) => "invalid-tolerance",
            Error::Unphysical(_) => "unphysical",
            Error::Domain(_) => "domain",
            Error::BracketTooSmall { .. } => "bracket-too-small",
            Error::Evaluation { .. } => unreachable!(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
