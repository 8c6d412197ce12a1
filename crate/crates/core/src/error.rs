use thiserror::Error;

/// Errors surfaced by the algebra core and the statistics layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,

    #[error("invalid map data: {0}")]
    InvalidMap(String),

    #[error("map is not an orientation-preserving bijection: {0}")]
    NotBijective(String),

    #[error("point is not dyadic: {0}")]
    NotDyadic(String),

    #[error("identity map has no support interval")]
    EmptySupport,

    #[error("support is the full circle")]
    FullCircleSupport,

    #[error("unknown generator name: {0}")]
    UnknownGenerator(String),

    #[error("invalid generator set: {0}")]
    InvalidGeneratorSet(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("collection has {k} distinguished times, cap is {cap}")]
    CollectionCapExceeded { k: usize, cap: usize },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
