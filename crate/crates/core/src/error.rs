use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A domain parameter lies outside the validity gate.
    #[error("out of regime: |{param}| = {value} exceeds gate {gate}")]
    OutOfRegime {
        param: String,
        value: f64,
        gate: f64,
    },
    #[error("domain error: {0}")]
    Domain(String),
    /// A zero opening angle was passed where an arc is required.
    #[error("straight cut: opening angle is zero")]
    StraightCut,
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("loop is oriented clockwise")]
    Orientation,
    #[error("loop is not closed: gap {gap:.3e} after curve {index}")]
    OpenLoop { index: usize, gap: f64 },
    #[error("zero area on one side of the cut")]
    ZeroArea,
    #[error("singular system: {0}")]
    Singular(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("stationary point is not a minimum (hessian eigenvalue {0:.3e})")]
    Saddle(f64),
    #[error("trivial eigenvector: f is constant")]
    TrivialEigenvector,
    #[error("graph is not connected ({0} components)")]
    Disconnected(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("no cut: every entry has the same sign")]
    NoCut,
    #[error("invalid input: {0}")]
    Invalid(String),
}
