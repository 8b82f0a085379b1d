use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point {0:?} lies outside the chart domain")]
    Domain(Vec<f64>),
    #[error("vector lies outside the evaluable conic domain at {0:?}")]
    ConeDomain(Vec<f64>),
    #[error("fundamental tensor is degenerate (|det| = {det:e}, floor {floor:e})")]
    DegenerateTensor { det: f64, floor: f64 },
    #[error("no cone crossing along the ray within s <= {0:e}")]
    NoRoot(f64),
    #[error("no sign change on the bracket: {0}")]
    Bracket(String),
    #[error("point is not on the boundary (b = {0:e})")]
    NotOnBoundary(f64),
    #[error("boundary is not timelike at {0:?}")]
    NonTimelikeBoundary(Vec<f64>),
    #[error("vector is not tangent to the boundary (db(w) = {0:e})")]
    NotTangent(f64),
    #[error("rigging does not point inwards (db(eta) = {0:e})")]
    NotInward(f64),
    #[error("invalid initial data: {0}")]
    InvalidInitialData(String),
    #[error("step size underflow at parameter {t} (h = {h:e})")]
    Stiffness { t: f64, h: f64 },
    #[error("curve is not a geodesic: residual {0:e}")]
    NotAGeodesic(f64),
    #[error("vector is not lightlike: L = {0:e}")]
    NotLightlike(f64),
    #[error("model {0} has no product-form temporal coordinate")]
    NotProductForm(String),
    #[error("charts were sampled on different grids")]
    GridMismatch,
    #[error("model {0} is not standard stationary")]
    NotStationary(String),
    #[error("budget exhausted: {0}")]
    BudgetExhausted(String),
    #[error("geodesic left the chart at {0:?} without a deck continuation")]
    ChartLeak(Vec<f64>),
    #[error("perturbation profile violates the decay conditions: {0}")]
    DecayViolation(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
