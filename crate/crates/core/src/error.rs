use thiserror::Error;

/// Errors surfaced by the solver stack.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}x{1} vs {2}x{3}")]
    ShapeMismatch(usize, usize, usize, usize),

    #[error("filter {0}x{1} does not fit in a {2}x{3} grid")]
    FilterTooLarge(usize, usize, usize, usize),

    #[error("singular solve: denominator magnitude below {0:e}")]
    SingularSolve(f64),

    #[error("degenerate kernel: no positive mass left after projection")]
    DegenerateKernel,

    #[error("solver diverged: non-finite values in iterates")]
    SolverDiverged,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("image {0}x{1} is smaller than the {2}x{2} window")]
    ImageTooSmall(usize, usize, usize),
}

pub type Result<T> = std::result::Result<T, Error>;
