//! Nonlinear elliptic equations on finite weighted directed graphs.
//!
//! A [`Graph`] carries a nonempty Dirichlet boundary; an [`OperatorSpec`]
//! describes an operator built from the graph gradient (Laplacian, eikonal,
//! infinity Laplacian, median / 1-Laplacian, p-harmonious combinations).
//! The [`solvers`] module computes solutions of the Dirichlet problem, the
//! [`verify`] module checks comparison, propagation of maxima and the
//! Harnack-type dichotomy on concrete fields, and [`fd`] relates grid graphs
//! to monotone finite difference stencils.

pub mod error;
pub mod fd;
pub mod generate;
pub mod graph;
pub mod io;
pub mod operators;
pub mod solvers;
pub mod verify;

pub use error::{Error, Result};
pub use graph::{Distance, Edge, Graph, GraphBuilder, GraphIssue, VertexField};
pub use operators::{Coefficient, Operator, OperatorKind, OperatorSpec, Terms};
pub use solvers::{EikonalSign, InitialGuess, Scheme, SolveReport, SolveStatus, SolverConfig};

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
