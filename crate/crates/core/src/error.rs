use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (defect {defect:e})")]
    NotHermitian { defect: f64 },
    #[error("matrix is not unitary (defect {defect:e})")]
    NotUnitary { defect: f64 },
    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },
    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),
    #[error("invalid tolerance: {0}")]
    InvalidTolerance(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("index {index} out of range for {len} factors")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("spectral clustering failed for block {block} after {attempts} attempts")]
    Degeneracy { block: usize, attempts: usize },
    #[error("consistency check failed: {0}")]
    ToleranceCheck(String),
    #[error("invalid parity set: {}", format_violations(.0))]
    InvalidParitySet(Vec<crate::parity::ParityViolation>),
    #[error("syndrome sectors have unequal dimensions {dims:?}, expected {expected} each")]
    UnequalSectors { dims: Vec<usize>, expected: usize },
    #[error("Fock space dimension {dim} exceeds cap {cap}")]
    SizeCap { dim: usize, cap: usize },
    #[error("state has weight {weight:e} on the truncation boundary (total excitation {cutoff})")]
    TruncationBoundary { weight: f64, cutoff: usize },
    #[error("frame overlap lost rank at path step {step} (smallest singular value {sigma:e})")]
    PathSingularity { step: usize, sigma: f64 },
    #[error("holonomy logarithm hit the branch cut at -1 after {attempts} subdivisions")]
    BranchCut { attempts: usize },
    #[error("no samples requested")]
    ZeroSamples,
    #[error("parse error: {0}")]
    Parse(String),
}

fn format_violations(v: &[crate::parity::ParityViolation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;
