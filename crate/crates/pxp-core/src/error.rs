//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("chain length must be at least 2, got L={0}")]
    ChainTooShort(usize),

    #[error("chain length L={0} exceeds the supported maximum of {max}", max = crate::hilbert::MAX_SITES)]
    ChainTooLong(usize),

    #[error("Neel states need an even chain length, got L={0}")]
    OddNeelChain(usize),

    #[error("the period-4 density wave needs L divisible by 4, got L={0}")]
    BadZ4Chain(usize),

    #[error("operation needs a periodic chain")]
    NotPeriodic,

    #[error("operation needs the blockade-constrained space")]
    NotBlockaded,

    #[error("state has dimension {state}, basis has dimension {basis}")]
    DimensionMismatch { state: usize, basis: usize },

    #[error("operators built on different bases (fingerprints {0:#018x} vs {1:#018x})")]
    BasisMismatch(u64, u64),

    #[error("operator is not diagonal: largest off-diagonal magnitude {0:.3e}")]
    NotDiagonal(f64),

    #[error("entanglement cut {cut} outside 1..{max}", max = .sites - 1)]
    BadCut { cut: usize, sites: usize },

    #[error("Krylov propagation stalled: error estimate {residual:.3e} after {steps} substeps")]
    KrylovStagnation { residual: f64, steps: usize },

    #[error("no revival found: best fidelity {best:.3e} in ({t_min:.3}, {t_max:.3}) is below {threshold}")]
    NoRevival {
        best: f64,
        t_min: f64,
        t_max: f64,
        threshold: f64,
    },

    #[error("scar chain terminated early at vector {step}: candidate norm {norm:.3e}")]
    ScarChainTerminated { step: usize, norm: f64 },

    #[error("dense matrix work capped at dimension {max}, basis has {dim}")]
    DenseTooLarge { dim: usize, max: usize },

    #[error("eigensolver failure: {0}")]
    Linalg(String),

    #[error("{0}")]
    Invalid(String),
}

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::Linalg(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
