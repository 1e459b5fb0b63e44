use thiserror::Error;

use crate::tree::Vertex;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parent relation contains a cycle through vertex {0}")]
    Cycle(Vertex),
    #[error("edge above vertex {vertex} has non-positive length {length}")]
    NonPositiveLength { vertex: Vertex, length: f64 },
    #[error("vertex {0} refers to a parent outside the tree")]
    DanglingVertex(Vertex),
    #[error("unknown vertex {0}")]
    UnknownVertex(Vertex),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("conductance graph is disconnected after zero-mass elimination")]
    Disconnected,
    #[error("speed measure has no positive atom")]
    AllZeroMeasure,
    #[error("linear system is singular")]
    SingularSystem,
    #[error("simulation exceeded the cap of {0} jumps")]
    JumpCapExceeded(usize),
    #[error("rejection sampler gave up after {attempts} attempts (acceptance rate estimate {acceptance:.3e})")]
    AttemptCapExceeded { attempts: usize, acceptance: f64 },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
