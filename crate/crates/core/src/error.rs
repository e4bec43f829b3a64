use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("discretization is empty: the shape is smaller than the mesh")]
    EmptyDomain,

    #[error("state space of {states} exceeds the enumeration limit {limit}")]
    TooLarge { states: u128, limit: u128 },

    #[error("path is not self-avoiding (vertex {0} repeats)")]
    NotSelfAvoiding(usize),

    #[error("path is not closed")]
    NotClosed,

    #[error("path is not a nearest-neighbor path at step {0}")]
    NotNearestNeighbor(usize),

    #[error("point lies on the loop")]
    PointOnLoop,

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("graph is not connected")]
    Disconnected,

    #[error("boundary arcs overlap or are empty")]
    BadArcs,

    #[error("loops overlap")]
    OverlappingLoops,

    #[error("a loop is nested inside another")]
    NestedLoops,

    #[error("subdomain must lie in the domain and share part of its boundary")]
    DetachedSubdomain,

    #[error("point absorbed at time {time}")]
    Absorbed { time: f64 },

    #[error("cut does not separate the domain")]
    NotSeparating,

    #[error("interface trapped at {0:?}")]
    Trapped((i64, i64)),

    #[error("numerical failure at step {index}: {reason}")]
    Numerical { index: usize, reason: String },

    #[error("factorization failed: matrix is not positive definite")]
    NotPositiveDefinite,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
