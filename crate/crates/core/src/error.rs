use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix is not symmetric (max |A - A^T| = {0:e})")]
    NotSymmetric(f64),

    #[error("eigensolver failed to converge for a {0}x{0} matrix")]
    NoConvergence(usize),

    #[error("graph is disconnected: node {unreached} is unreachable from node {source_node}")]
    Disconnected { source_node: usize, unreached: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("degeneracy classes do not match the spectrum: {0}")]
    ClassMismatch(String),

    #[error(
        "memory guard: {entries} table entries exceed the cap of {cap}; use a coarser grid or fewer times"
    )]
    MemoryGuard { entries: usize, cap: usize },

    #[error("window [{t0}, {t1}] is not covered by the grid span [{start}, {end}]")]
    WindowOutsideGrid { t0: f64, t1: f64, start: f64, end: f64 },

    #[error("envelope fit needs at least 3 local maxima in the window, found {0}")]
    InsufficientMaxima(usize),

    #[error("series must be positive on the envelope window (t = {0})")]
    NonPositive(f64),

    #[error("ratio never crosses 1 from below on the span [{start}, {end}]")]
    NoCrossing { start: f64, end: f64 },

    #[error("Bessel order {order} exceeds the configured maximum {max_order}")]
    OrderTooLarge { order: u64, max_order: u64 },

    #[error("lattice truncation too small: captured mass deficit {0:e} exceeds 1e-8")]
    TruncationTooSmall(f64),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
