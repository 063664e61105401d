use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid group: {0}")]
    InvalidGroup(String),
    #[error("representation does not fit the group: {0}")]
    RepresentationMismatch(String),
    #[error("element does not belong to the expected group")]
    ShapeMismatch,
    #[error("direction is not lightlike (pairing {0:e})")]
    NotLightlike(f64),
    #[error("integration did not converge after {steps} steps (last defect {defect:e})")]
    NoConvergence { steps: usize, defect: f64 },
    #[error("no valid placement: {0}")]
    NoValidPlacement(String),
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
    #[error("representation is not fully charged; pairing is degenerate")]
    NotFullyCharged,
    #[error("ill-conditioned solve: {0}")]
    IllConditioned(String),
    #[error("time step {dt} violates CFL bound for dx = {dx}")]
    CflViolation { dt: f64, dx: f64 },
    #[error("fixed-point iteration failed at step {step} (residual {residual:e})")]
    FixedPointDivergence { step: usize, residual: f64 },
    #[error("element is not central")]
    NotCentral,
    #[error("outside domain: {0}")]
    OutsideDomain(String),
    #[error("gauge: {0}")]
    Gauge(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;
