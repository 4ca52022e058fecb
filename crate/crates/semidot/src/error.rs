use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("configuration is invalid:\n{}", .0.join("\n"))]
    InvalidConfig(Vec<String>),

    #[error("config parse error: {0}")]
    ConfigParse(String),

    #[error("non-finite integrand value {value} at node ({x}, {y})")]
    NonFiniteIntegrand { x: f64, y: f64, value: f64 },

    #[error("sampling acceptance rate fell below 1e-6 ({accepted} accepted out of {proposed} proposals)")]
    DegenerateSampling { accepted: u64, proposed: u64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("point ({}, {}) lies outside the domain", .0.x, .0.y)]
    OutsideDomain(crate::Vec2),

    #[error("solver did not converge: {0}")]
    NoConvergence(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serialize(#[from] serde_json::Error),
}
