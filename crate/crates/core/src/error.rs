//! Crate-wide error type.

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("eigensolver did not converge for dimension {dim}")]
    NonConvergence { dim: usize },

    #[error("matrix is not hermitian: defect {defect:.3e} exceeds {tol:.3e}")]
    NotHermitian { defect: f64, tol: f64 },

    #[error(
        "ambiguous spectral count at level {level}: eigenvalue {eigenvalue} lies within gap_tol {gap_tol:.3e} \
         (k below the convergence threshold, or mass in a forbidden chamber)"
    )]
    AmbiguousCount {
        eigenvalue: f64,
        level: f64,
        gap_tol: f64,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("flux q = {q} too large for k = {k}: need 2|q| < k^2")]
    FluxTooLarge { q: i64, k: usize },

    #[error("plaquette phase {phase} at site {site:?} too close to the branch cut")]
    RoughField { site: Vec<usize>, phase: f64 },

    #[error("plaquette phase sum / 2pi = {value} deviates from an integer by more than {tol:.1e}")]
    NonIntegerCharge { value: f64, tol: f64 },

    #[error("level k = {k} cannot resolve theta mode {mode:?}: need k > 2 * {degree}")]
    Resolution { k: usize, mode: Vec<i64>, degree: i64 },

    #[error("unsupported coefficient representation: {0}")]
    UnsupportedRepresentation(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("symbol nearly singular at x = {x:?}, theta = {theta:?}: min |eigenvalue| = {min_abs:.3e}")]
    NearSingular {
        x: Vec<f64>,
        theta: Vec<f64>,
        min_abs: f64,
    },

    #[error("grid too coarse: value shifted by {shift:.3e} when the grid was halved")]
    GridResolution { shift: f64 },

    #[error("mass m = {m} sits on a chamber wall for n = {n}")]
    ChamberWall { n: usize, m: f64 },

    #[error("zero mode in the free spectrum: mass m = {m} is degenerate at a corner momentum")]
    DegenerateMass { m: f64 },

    #[error("sign calibration failed: measured defect {defect} is not +1 or -1")]
    Calibration { defect: i64 },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
