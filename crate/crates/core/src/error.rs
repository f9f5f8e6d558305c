use thiserror::Error;

/// Errors raised by the finger models and solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("degenerate geometry: squared actuator length {squared_length} is not positive")]
    DegenerateGeometry { squared_length: f64 },

    #[error("l3(θ3) is not monotonic inside the joint limits (slope changes sign near {theta3_deg:.3}°)")]
    NonMonotonicMap { theta3_deg: f64 },

    #[error("Newton solve did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("target is outside the reachable workspace: {0}")]
    OutOfWorkspace(String),

    #[error(
        "singular configuration at θ1={theta1_deg:.4}°, θ2={theta2_deg:.4}° (|det| = {det:e})"
    )]
    SingularConfiguration {
        theta1_deg: f64,
        theta2_deg: f64,
        det: f64,
    },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("no real root: discriminant {discriminant:e} < 0 at delta_y = {delta_y} mm")]
    NoRealRoot { delta_y: f64, discriminant: f64 },

    #[error("non-physical state: {0}")]
    NonPhysicalState(String),

    #[error("singular stiffness matrix (condition number {condition:e})")]
    SingularStiffness { condition: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("numerical blow-up at t = {t_s} s (|θ̇| = {speed:e} rad/s)")]
    NumericalBlowup { t_s: f64, speed: f64 },
}

pub type Result<T> = std::result::Result<T, ModelError>;
