use thiserror::Error;

#[derive(Debug, Error)]
pub enum PmechError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid mismatch between operands")]
    GridMismatch,
    #[error("domain too small: tail mass {tail:.3e} exceeds {limit}")]
    DomainTooSmall { tail: f64, limit: f64 },
    #[error("grid too coarse: spectral content {ratio:.3e} near Nyquist on axis {axis}")]
    GridTooCoarse { axis: &'static str, ratio: f64 },
    #[error("non-finite values in input")]
    NonFinite,
    #[error("grid of {points} output points too large for the full oracle; use subset mode")]
    OracleTooLarge { points: usize },
    #[error("input is not in L1_v: s-mean {mean:.3e} relative to mass")]
    NotInL1v { mean: f64 },
    #[error("shift {shift:.4} exceeds wave grid half-extent {extent:.4}")]
    ShiftOutOfRange { shift: f64, extent: f64 },
    #[error("hbar {hbar} outside admissible range ({lo}, {hi}]")]
    InadmissibleHbar { hbar: f64, lo: f64, hi: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("series not converged after {order} terms (spectral radius estimate {radius:.3e})")]
    SeriesNotConverged { order: usize, radius: f64 },
    #[error("integrator unstable at t = {t:.4}: norm grew by {growth:.2e}")]
    Unstable { t: f64, growth: f64 },
    #[error("truncation leakage {leak:.3e} exceeds tolerance at dimension {dim}")]
    TruncationLeakage { leak: f64, dim: usize },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, PmechError>;
