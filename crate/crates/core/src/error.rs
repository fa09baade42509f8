use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside the domain of an operation (non-finite values,
    /// malformed grids, mismatched lengths).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid time step: {0}")]
    InvalidStep(String),

    /// A designed pulse diverged or exceeded the configured amplitude cap.
    #[error("singular pulse at t = {t}: {reason}")]
    Singular { t: f64, reason: String },

    #[error("no bound state for eps = {eps}, V_L = {v_left}, V_R = {v_right} (requires 2 eps^2 > |V_L - V_R|)")]
    NoBoundState { eps: f64, v_left: f64, v_right: f64 },

    #[error("depth tuning failed: {0}")]
    Tuning(String),

    #[error("map table error: {0}")]
    Table(String),

    #[error("coupling {coupling} = {omega} at t = {t} lies outside the map table range [{min}, {max}]")]
    OutOfRange {
        t: f64,
        coupling: &'static str,
        omega: f64,
        min: f64,
        max: f64,
    },

    #[error("grid resolution: {0}")]
    Resolution(String),

    #[error("step size too large: {0}")]
    StepSize(String),

    #[error("no convergence: {0}")]
    NonConvergence(String),

    #[error("bracket failure: {0}")]
    Bracket(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Errors caused by the user's configuration rather than by the numerics.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_))
    }
}
