use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("not a fixed point: residual {residual:.3e} exceeds tolerance {tolerance:.1e}")]
    NotAFixedPoint { residual: f64, tolerance: f64 },

    #[error("step size underflow at t = {t} (h = {h:.3e}); system is too stiff for the explicit integrator")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("integration exceeded {max_steps} steps before reaching t = {t_end}")]
    TooManySteps { max_steps: usize, t_end: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("dimension mismatch: expected N = {expected}, found N = {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("N = {n} exceeds the supported maximum of {max}")]
    TooLarge { n: usize, max: usize },

    #[error("{what} did not converge (residuals: {residuals:?})")]
    NoConvergence { what: &'static str, residuals: Vec<f64> },

    #[error("singular matrix encountered in {0}")]
    Singular(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
