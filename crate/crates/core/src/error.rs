use crate::C64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("singular shifted matrix at shift {0}")]
    SingularShift(C64),
    #[error("ill-conditioned shifted matrix at shift {shift} (cond ~ {cond:e})")]
    IllConditionedShift { shift: C64, cond: f64 },
    #[error("assumption violated: {0} is singular")]
    AssumptionViolated(String),
    #[error("iteration breakdown at step {0}")]
    IterationBreakdown(usize),
    #[error("no spectral splitting: eigenvalues on the imaginary axis")]
    NoSplitting,
    #[error("singular invariant-subspace basis")]
    SingularBasis,
    #[error("shift pole hit")]
    PoleHit,
    #[error("empty candidate set")]
    EmptyCandidates,
    #[error("rank-deficient projection window")]
    RankDeficientWindow,
    #[error("no valid shift available")]
    NoValidShift,
    #[error("singular Upsilon factorization")]
    SingularUpsilon,
    #[error("degenerate Psi weight for the conjugate pair")]
    DegeneratePsi,
    #[error("refusing to materialize a {rows}x{cols} dense matrix")]
    SizeGuard { rows: usize, cols: usize },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
