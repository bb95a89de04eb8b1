use std::fmt;

use crate::graph::GraphIssue;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid graph: {}", IssueList(.0))]
    InvalidGraph(Vec<GraphIssue>),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("`{to}` is not a neighbor of `{from}`")]
    NotANeighbor { from: String, to: String },
    #[error("`{0}` is a boundary vertex; an interior vertex is required")]
    BoundaryVertex(String),
    #[error("field has {found} values, graph has {expected} vertices")]
    FieldLength { expected: usize, found: usize },
    #[error("non-finite value at vertex `{0}`")]
    NonFiniteValue(String),
    #[error("direction vector {0} is zero")]
    ZeroDirection(usize),
    #[error("direction vectors are linearly dependent")]
    DependentDirections,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("geometric graph has no interior vertex")]
    NoInteriorVertex,
    #[error("invalid operator spec: {0}")]
    InvalidSpec(String),
    #[error("operator is not homogeneous: {0}")]
    NotHomogeneous(String),
    #[error("fixed-point map is degenerate (L = 0)")]
    DegenerateMap,
    #[error("scalar equation at vertex `{0}` has no root")]
    ScalarSolve(String),
    #[error("source must be strictly positive, got {value} at `{vertex}`")]
    NonpositiveSource { vertex: String, value: f64 },
    #[error("vertices not connected to the boundary: {}", .0.join(", "))]
    NotConnected(Vec<String>),
    #[error("hypothesis not satisfied: {0}")]
    Hypothesis(String),
    #[error("unknown name `{0}`")]
    UnknownName(String),
    #[error("{context}: {message}")]
    Parse { context: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

struct IssueList<'a>(&'a [GraphIssue]);

impl fmt::Display for IssueList<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, issue) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{issue}")?;
        }
        Ok(())
    }
}
