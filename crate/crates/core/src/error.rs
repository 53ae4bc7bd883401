use thiserror::Error;

use crate::Parity;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{samples} samples cannot resolve |k| <= {k_max}: Nyquist limit is {limit}")]
    NyquistExceeded {
        samples: usize,
        k_max: usize,
        limit: usize,
    },

    #[error("Fourier table half-width {available} is below the {needed} required by the Galerkin truncation")]
    InsufficientTable { needed: usize, available: usize },

    #[error("matrix is not Hermitian (defect {defect:e})")]
    NotHermitian { defect: f64 },

    #[error("eigensolver did not converge (worst residual {worst_residual:e})")]
    NoConvergence { worst_residual: f64 },

    #[error("eigenpair residual {residual:e} exceeds tolerance {tolerance:e}")]
    ResidualTooLarge { residual: f64, tolerance: f64 },

    #[error("{parity} pair n = {n} deviates from its free level by {deviation:e} (allowed {bound:e}); truncation too small or outside the asymptotic regime")]
    PairValidation {
        parity: Parity,
        n: usize,
        deviation: f64,
        bound: f64,
    },

    #[error("pair refinement for {parity} n = {n} failed: {reason}")]
    Refinement {
        parity: Parity,
        n: usize,
        reason: String,
    },

    #[error("denominator guard hit at partial sum {partial_sum} (|denominator| = {denominator:e})")]
    DenominatorGuard { partial_sum: i64, denominator: f64 },

    #[error("phase undefined: q_{index} = 0")]
    PhaseUndefined { index: i64 },

    #[error("decay fit needs at least 4 positive points, got {positive} ({dropped} zero points dropped)")]
    InsufficientFitData { positive: usize, dropped: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerics (oracle validation, guards, solver),
    /// as opposed to malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. }
                | Error::ResidualTooLarge { .. }
                | Error::PairValidation { .. }
                | Error::Refinement { .. }
                | Error::DenominatorGuard { .. }
                | Error::PhaseUndefined { .. }
                | Error::InsufficientFitData { .. }
                | Error::NotHermitian { .. }
                | Error::InsufficientTable { .. }
                | Error::NyquistExceeded { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
