use thiserror::Error;

/// Errors raised by the library. Semantic failures (a set is not regular, a
/// certificate does not validate) are reported through values where the
/// caller needs the diagnostics, and through this enum where the operation
/// cannot produce a result at all.
#[derive(Debug, Error)]
pub enum Error {
    #[error("point y = {y:?} lies outside the parameter box")]
    YOutsideBox { y: Vec<f64> },

    #[error("point ({x:?}, {y:?}) lies inside the set; nothing to separate")]
    PointInsideSet { x: Vec<f64>, y: Vec<f64> },

    #[error("no multiplier up to {max_m:e} validates; worst sample at y = {y:?} has value {value:e}")]
    BigMSearchFailed { max_m: f64, y: Vec<f64>, value: f64 },

    #[error("slice at y = {y:?} has inscribed radius {radius:e}, below the interior threshold")]
    DegenerateSlice { y: Vec<f64>, radius: f64 },

    #[error("interpolation system at y = {y:?} is singular (|det| = {det:e})")]
    SingularSystem { y: Vec<f64>, det: f64 },

    #[error("grid is not a full tensor grid over the parameter box")]
    GridNotTensor,

    #[error("set is not regular: {reason}")]
    NotRegular { reason: String },

    #[error("dimension n = {n} exceeds the supported bound {max}")]
    DimensionTooLarge { n: usize, max: usize },

    #[error("fiber cone at grid index {index} is not pointed")]
    ConeNotPointed { index: usize },

    #[error("order unit is not an interior point of the fiber cone at grid index {index}")]
    UnitNotInterior { index: usize },

    #[error("matrix is not an isometry (||V^T V - I|| = {residual:e})")]
    NotIsometry { residual: f64 },

    #[error("polytope is empty")]
    EmptyPolytope,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
