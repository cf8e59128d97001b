use thiserror::Error;

#[derive(Debug, Error)]
pub enum LinimpError {
    #[error("collocation nodes must be distinct, increasing and inside [0,1]")]
    DegenerateNodes,
    #[error("exact-rational mode requires rational inputs: {0}")]
    ModeMismatch(String),
    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),
    #[error("spectrum is not closed under complex conjugation; result would not be real")]
    NonRealResult,
    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),
    #[error("linear system is singular")]
    SingularSystem,
    #[error("stage solve failed at step {step}")]
    StageSolveFailure { step: usize },
    #[error("non-finite state detected at step {step}")]
    BlowupDetected { step: usize },
    #[error("problem has no exact solution; exact gamma initialization unavailable")]
    MissingExactSolution,
    #[error("problem is not time-reversible; backward gamma initialization unavailable")]
    IrreversibleProblem,
    #[error("nonlinear solve failed: {0}")]
    NonlinearSolveFailure(String),
    #[error("need at least 3 finite data points to fit a slope")]
    InsufficientData,
    #[error("invalid experiment plan: {0}")]
    InvalidPlan(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
