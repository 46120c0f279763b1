use thiserror::Error;

/// Errors raised by the geometry kernel, the sampler and the experiment layer.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration sits within tolerance of a tangency, a triple point or
    /// a zero-length arc. Callers may perturb and retry.
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("invalid point ({x}, {y}, r={r}): {reason}")]
    InvalidPoint {
        x: f64,
        y: f64,
        r: f64,
        reason: &'static str,
    },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("pixel size {delta} is coarser than r0/8 = {limit}")]
    ResolutionTooCoarse { delta: f64, limit: f64 },

    #[error("window too small: no diamond box fits")]
    WindowTooSmall,

    /// The point count exceeded the safety limit, which usually means the
    /// parameters do not define a stable model.
    #[error("configuration explosion: {n} points exceeds limit {limit:.0} at step {step}")]
    Explosion { n: usize, limit: f64, step: u64 },

    #[error("cached functionals drifted from recomputation: {0}")]
    CacheMismatch(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn degenerate(msg: impl Into<String>) -> Error {
    Error::DegenerateGeometry(msg.into())
}
