//! Dirichlet sets for fully nonlinear degenerate elliptic equations `F(Hess u) = 0`.

// guards like `!(x > 0.0)` are meant to reject NaN as well; matrix code indexes by position
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cones;
pub mod config;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod grid;
pub mod sampling;
pub mod solver;
pub mod suite;
pub mod symmat;

pub use cones::ConeSet;
pub use error::{Error, Result};
pub use symmat::{Mat, SymMatrix};
pub use geometry::Domain;
pub use grid::{GridBox, GridField};
pub use solver::{DirichletProblem, SolveConfig, SolveReport, SolverOptions};

/// Version of this crate, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
