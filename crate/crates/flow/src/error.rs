use thiserror::Error;

#[derive(Debug, Error)]
pub enum FlowError {
    #[error("non-physical state at step {step}, cell ({kx},{my}): rho={rho}, p={p}")]
    Positivity { step: usize, kx: usize, my: usize, rho: f64, p: f64 },
    #[error("deflection {theta_deg:.4} deg exceeds detachment angle {theta_max_deg:.4} deg at M={mach}")]
    Detached { mach: f64, theta_deg: f64, theta_max_deg: f64 },
    #[error("subsonic normal Mach number {0} across shock")]
    InvalidShock(f64),
    #[error("interaction solve failed: {0}")]
    InteractionSolve(String),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] errest_core::Error),
}

pub type Result<T> = std::result::Result<T, FlowError>;
