//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mode list is empty")]
    EmptyModeList,

    #[error("bosonic mode `{0}` has photon cutoff 0; cutoff must be at least 1")]
    InvalidCutoff(String),

    #[error("duplicate mode label `{0}`")]
    DuplicateLabel(String),

    #[error("unknown mode label `{0}`")]
    UnknownLabel(String),

    #[error("mode `{0}` is not a qubit")]
    NotAQubit(String),

    #[error("operator dimensions differ: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("sparse entry index ({row}, {col}) out of bounds for dimension {dim}")]
    IndexOutOfBounds { row: usize, col: usize, dim: usize },

    #[error("requested space of dimension {0} exceeds the 2^26 state guard")]
    DimensionOverflow(usize),

    #[error("matrix is not Hermitian: max |M - M^dag| entry = {0:.3e}")]
    NotHermitian(f64),

    #[error("lattice error: {0}")]
    Lattice(String),

    #[error("invalid site specification: {0}")]
    SiteSpec(String),

    #[error("drive references absent qubit-mode pair: qubit `{qubit}`, mode `{mode}` at site {site}")]
    UnknownDriveTarget { qubit: String, mode: String, site: usize },

    #[error("adiabatic elimination is singular: detuning for {0} is zero")]
    EliminationSingular(String),

    #[error("dispersive-ratio {ratio:.3} for {context} exceeds the hard limit {limit:.3}")]
    DispersiveRatio { context: String, ratio: f64, limit: f64 },

    #[error("drive frequency matching violated: {condition} (mismatch {mismatch:.3e} MHz exceeds tolerance {tolerance:.1e} MHz)")]
    FrequencyMismatch { condition: String, mismatch: f64, tolerance: f64 },

    #[error("inconsistent site pair between elimination results")]
    InconsistentSitePair,

    #[error("adjacent bonds {0:?} and {1:?} use an identical drive-frequency combination")]
    FrequencyCollision((usize, usize), (usize, usize)),

    #[error("state norm drifted to {norm} (tolerance {tol}) at t = {t} us")]
    NormDrift { norm: f64, tol: f64, t: f64 },

    #[error("initial state is not normalized: norm = {0}")]
    BadInitialState(f64),

    #[error("dense propagator requested for dimension {0} above threshold {1}")]
    DenseThreshold(usize, usize),

    #[error("Hamiltonian is not periodic with the stated period: max deviation {0:.3e}")]
    NotPeriodic(f64),

    #[error("quasi-energy {0:.6} MHz lies within {1:.1e} of the Floquet branch cut; increase the cycle frequency")]
    BranchCut(f64, f64),

    #[error("no oscillation detected: fit residual {residual:.3e} exceeds {limit:.3e}")]
    NoOscillation { residual: f64, limit: f64 },

    #[error("linear algebra backend error: {0}")]
    Linalg(String),

    #[error("unknown preset `{0}`; available: section_iv_default, resonant_polariton, dispersive_soc")]
    UnknownPreset(String),

    #[error("unknown scenario `{0}`; available: {1}")]
    UnknownScenario(String, String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("sweep error: {0}")]
    Sweep(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::Linalg(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
