use thiserror::Error;

/// Failure modes shared by the whole crate.
#[derive(Error, Debug, Clone)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("mesh too coarse: h = {h} exceeds limit {limit} for this domain")]
    MeshTooCoarse { h: f64, limit: f64 },

    #[error("quadrature did not converge: achieved {achieved:e}, target {target:e}")]
    QuadratureNonconvergence { achieved: f64, target: f64 },

    #[error("eigensolver did not converge: worst residual {residual:e}")]
    SolverNonconvergence { residual: f64 },

    #[error("ground state changes sign (assembly or solver bug): min entry {min_entry:e}")]
    PositivityViolation { min_entry: f64 },

    #[error("spectrum truncated too early for this time: e^(-(lambda_k - lambda_1) t) = {tail:e}")]
    TruncationInsufficient { tail: f64 },

    #[error("singular input: {0}")]
    SingularInput(String),

    #[error("step cap {cap} exceeded during path simulation")]
    StepCapExceeded { cap: usize },

    #[error("lapack routine {routine} failed with info = {info}")]
    Lapack { routine: &'static str, info: i32 },
}

pub type Result<T> = std::result::Result<T, Error>;
